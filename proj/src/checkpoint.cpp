#include "cluesum/checkpoint.hpp"

#include <cstring>
#include <fstream>

#include "json.hpp"

namespace cluesum {

namespace {

constexpr char kMagic[8] = {'C', 'L', 'S', 'M', 'C', 'K', 'P', '1'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void write_raw(std::ofstream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_raw(std::ifstream& in, const std::string& path) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw IoError("truncated checkpoint: " + path);
  return v;
}

nlohmann::json model_to_json(const ModelConfig& m) {
  return {{"d_model", m.d_model},       {"d_ff", m.d_ff},
          {"enc_layers", m.enc_layers}, {"dec_layers", m.dec_layers},
          {"enc_heads", m.enc_heads},   {"gat_layers", m.gat_layers},
          {"gat_heads", m.gat_heads},   {"dropout", m.dropout},
          {"max_positions", m.max_positions}, {"src_vocab", m.src_vocab},
          {"tgt_vocab", m.tgt_vocab},   {"leaky_slope", m.leaky_slope}};
}

ModelConfig model_from_json(const nlohmann::json& j) {
  ModelConfig m;
  m.d_model = j.at("d_model").get<int>();
  m.d_ff = j.at("d_ff").get<int>();
  m.enc_layers = j.at("enc_layers").get<int>();
  m.dec_layers = j.at("dec_layers").get<int>();
  m.enc_heads = j.at("enc_heads").get<int>();
  m.gat_layers = j.at("gat_layers").get<int>();
  m.gat_heads = j.at("gat_heads").get<int>();
  m.dropout = j.at("dropout").get<double>();
  m.max_positions = j.at("max_positions").get<int>();
  m.src_vocab = j.at("src_vocab").get<int>();
  m.tgt_vocab = j.at("tgt_vocab").get<int>();
  m.leaky_slope = j.at("leaky_slope").get<double>();
  return m;
}

}  // namespace

void save_checkpoint(const std::string& path, const Checkpoint& ckpt) {
  std::ofstream out(path, std::ios::binary);
  if (!out.is_open()) throw IoError("cannot write checkpoint: " + path);

  nlohmann::json header;
  header["model"] = model_to_json(ckpt.model);
  header["clue"] = {{"window", ckpt.clue.window},     {"damping", ckpt.clue.damping},
                    {"tol", ckpt.clue.tol},           {"max_iter", ckpt.clue.max_iter},
                    {"top_ratio", ckpt.clue.top_ratio}, {"max_clues", ckpt.clue.max_clues}};
  header["src_vocab"] = ckpt.src_vocab.tokens;
  header["tgt_vocab"] = ckpt.tgt_vocab.tokens;
  nlohmann::json lex = nlohmann::json::object();
  for (const auto& [src, targets] : ckpt.lexicon.entries) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& [tgt, p] : targets) arr.push_back({tgt, p});
    lex[src] = arr;
  }
  header["lexicon"] = lex;

  std::string header_str = header.dump();
  out.write(kMagic, sizeof(kMagic));
  write_raw<std::uint32_t>(out, kVersion);
  write_raw<std::uint64_t>(out, header_str.size());
  out.write(header_str.data(), static_cast<std::streamsize>(header_str.size()));

  write_raw<std::uint64_t>(out, ckpt.params.tensors.size());
  for (const auto& [name, m] : ckpt.params.tensors) {
    write_raw<std::uint32_t>(out, static_cast<std::uint32_t>(name.size()));
    out.write(name.data(), static_cast<std::streamsize>(name.size()));
    write_raw<std::uint8_t>(out, 0);  // dtype float64
    write_raw<std::uint32_t>(out, static_cast<std::uint32_t>(m.rows));
    write_raw<std::uint32_t>(out, static_cast<std::uint32_t>(m.cols));
    out.write(reinterpret_cast<const char*>(m.data.data()),
              static_cast<std::streamsize>(m.data.size() * sizeof(double)));
  }
  if (!out) throw IoError("failed writing checkpoint: " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in.is_open()) throw IoError("checkpoint not found: " + path);

  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
    throw ValueError("not a checkpoint file: " + path);
  std::uint32_t version = read_raw<std::uint32_t>(in, path);
  if (version != kVersion)
    throw ValueError("unsupported checkpoint version " + std::to_string(version));

  std::uint64_t header_len = read_raw<std::uint64_t>(in, path);
  std::string header_str(header_len, '\0');
  in.read(header_str.data(), static_cast<std::streamsize>(header_len));
  if (!in) throw IoError("truncated checkpoint: " + path);

  nlohmann::json header;
  try {
    header = nlohmann::json::parse(header_str);
  } catch (const nlohmann::json::parse_error& e) {
    throw ValueError("corrupt checkpoint header: " + std::string(e.what()));
  }

  Checkpoint ckpt;
  ckpt.model = model_from_json(header.at("model"));
  const auto& cj = header.at("clue");
  ckpt.clue.window = cj.at("window").get<int>();
  ckpt.clue.damping = cj.at("damping").get<double>();
  ckpt.clue.tol = cj.at("tol").get<double>();
  ckpt.clue.max_iter = cj.at("max_iter").get<int>();
  ckpt.clue.top_ratio = cj.at("top_ratio").get<double>();
  ckpt.clue.max_clues = cj.at("max_clues").get<int>();

  auto rebuild_vocab = [](const nlohmann::json& arr, Vocabulary::Side side) {
    Vocabulary v;
    v.side = side;
    for (const auto& t : arr) v.tokens.push_back(t.get<std::string>());
    for (int i = 0; i < v.size(); ++i) v.ids[v.tokens[static_cast<std::size_t>(i)]] = i;
    return v;
  };
  ckpt.src_vocab = rebuild_vocab(header.at("src_vocab"), Vocabulary::Side::Source);
  ckpt.tgt_vocab = rebuild_vocab(header.at("tgt_vocab"), Vocabulary::Side::Target);

  for (const auto& [src, arr] : header.at("lexicon").items()) {
    std::vector<std::pair<std::string, double>> targets;
    for (const auto& e : arr)
      targets.emplace_back(e.at(0).get<std::string>(), e.at(1).get<double>());
    ckpt.lexicon.entries[src] = std::move(targets);
  }

  std::uint64_t count = read_raw<std::uint64_t>(in, path);
  for (std::uint64_t i = 0; i < count; ++i) {
    std::uint32_t name_len = read_raw<std::uint32_t>(in, path);
    std::string name(name_len, '\0');
    in.read(name.data(), name_len);
    std::uint8_t dtype = read_raw<std::uint8_t>(in, path);
    if (dtype != 0) throw ValueError("unsupported tensor dtype in " + path);
    std::uint32_t rows = read_raw<std::uint32_t>(in, path);
    std::uint32_t cols = read_raw<std::uint32_t>(in, path);
    ad::Matrix m(static_cast<int>(rows), static_cast<int>(cols));
    in.read(reinterpret_cast<char*>(m.data.data()),
            static_cast<std::streamsize>(m.data.size() * sizeof(double)));
    if (!in) throw IoError("truncated checkpoint: " + path);
    ckpt.params.grads[name] = ad::Matrix(m.rows, m.cols);
    ckpt.params.tensors[name] = std::move(m);
  }
  return ckpt;
}

}  // namespace cluesum
