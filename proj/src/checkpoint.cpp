#include "tkgf/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace tkgf {

namespace {

constexpr char kMagic[8] = {'T', 'K', 'G', 'F', 'C', 'K', 'P', 'T'};
constexpr std::uint32_t kVersion = 1;

template <class U>
void put_le(std::ostream& out, U v) {
  unsigned char b[sizeof(U)];
  for (std::size_t i = 0; i < sizeof(U); ++i) b[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xFF);
  out.write(reinterpret_cast<const char*>(b), sizeof(U));
}

template <class U>
U get_le(std::istream& in) {
  unsigned char b[sizeof(U)];
  if (!in.read(reinterpret_cast<char*>(b), sizeof(U))) throw std::runtime_error("truncated checkpoint");
  U v = 0;
  for (std::size_t i = 0; i < sizeof(U); ++i) v |= static_cast<U>(b[i]) << (8 * i);
  return v;
}

nlohmann::json config_json(const ModelConfig& c) {
  return {{"d_model", c.d_model},       {"n_layers", c.n_layers},     {"n_heads", c.n_heads},
          {"max_seq_len", c.max_seq_len}, {"vocab_size", c.vocab_size}, {"entity_count", c.entity_count}};
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  nlohmann::json header;
  header["config"] = config_json(ckpt.params.config);
  header["precision"] = "float32";
  header["fingerprint"] = ckpt.fingerprint;
  header["manifest"] = nlohmann::json::array();
  for (const auto& s : ckpt.params.manifest)
    header["manifest"].push_back({{"name", s.name}, {"rows", s.rows}, {"cols", s.cols}, {"offset", s.offset}});
  std::ostringstream vocab;
  ckpt.vocab.write(vocab);
  header["vocab"] = vocab.str();
  const std::string text = header.dump();

  const auto tmp = std::filesystem::path(path.string() + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write checkpoint " + tmp.string());
    out.write(kMagic, sizeof kMagic);
    put_le<std::uint32_t>(out, kVersion);
    put_le<std::uint64_t>(out, text.size());
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    for (float f : ckpt.params.values) put_le<std::uint32_t>(out, std::bit_cast<std::uint32_t>(f));
    if (!out) throw std::runtime_error("failed writing checkpoint " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open checkpoint " + path.string());
  char magic[8];
  if (!in.read(magic, sizeof magic) || std::memcmp(magic, kMagic, sizeof magic) != 0)
    throw std::runtime_error(path.string() + " is not a checkpoint");
  const auto version = get_le<std::uint32_t>(in);
  if (version != kVersion) throw std::runtime_error("unsupported checkpoint version " + std::to_string(version));
  const auto len = get_le<std::uint64_t>(in);
  std::string text(len, '\0');
  if (!in.read(text.data(), static_cast<std::streamsize>(len))) throw std::runtime_error("truncated checkpoint");
  const auto header = nlohmann::json::parse(text);

  ModelConfig cfg;
  const auto& c = header.at("config");
  cfg.d_model = c.at("d_model");
  cfg.n_layers = c.at("n_layers");
  cfg.n_heads = c.at("n_heads");
  cfg.max_seq_len = c.at("max_seq_len");
  cfg.vocab_size = c.at("vocab_size");
  cfg.entity_count = c.at("entity_count");

  Checkpoint ckpt;
  ckpt.params = ModelParams<float>::zeros(cfg);
  const auto& manifest = header.at("manifest");
  if (manifest.size() != ckpt.params.manifest.size()) throw std::runtime_error("checkpoint manifest mismatch");
  for (std::size_t i = 0; i < manifest.size(); ++i) {
    const TensorSpec s{manifest[i].at("name"), manifest[i].at("rows"), manifest[i].at("cols"),
                       manifest[i].at("offset")};
    if (!(s == ckpt.params.manifest[i])) throw std::runtime_error("checkpoint tensor " + s.name + " has wrong shape");
  }
  for (auto& f : ckpt.params.values) f = std::bit_cast<float>(get_le<std::uint32_t>(in));
  std::istringstream vocab(header.at("vocab").get<std::string>());
  ckpt.vocab = TokenVocab::read(vocab);
  if (ckpt.vocab.size() != cfg.vocab_size) throw std::runtime_error("checkpoint vocabulary size mismatch");
  ckpt.fingerprint = header.value("fingerprint", "");
  return ckpt;
}

}  // namespace tkgf
