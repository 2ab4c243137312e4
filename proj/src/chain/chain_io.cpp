#include "sabfl/chain/chain_io.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"
#include "sabfl/util/error.hpp"

namespace sabfl {
namespace {

using nlohmann::json;
constexpr std::string_view kMagic = "SABFLW01";

std::string b64_reals(std::span<const double> v) { return base64_encode(reals_to_bytes(v)); }

template <std::size_t N>
std::array<std::uint8_t, N> fixed_bytes(const json& j) {
  const auto raw = base64_decode(j.get<std::string>());
  if (raw.size() != N) throw IngestionError("fixed-width field has wrong length");
  std::array<std::uint8_t, N> out{};
  std::copy(raw.begin(), raw.end(), out.begin());
  return out;
}

std::vector<double> reals_of(const json& j) { return bytes_to_reals(base64_decode(j.get<std::string>())); }

json shape_json(const Shape& s) {
  return {{"kind", to_string(s.kind)}, {"d", s.input_dim}, {"c", s.num_classes}, {"h", s.hidden_dim}};
}

Shape shape_of(const json& j) {
  Shape s;
  s.kind = model_kind_from_string(j.at("kind").get<std::string>());
  s.input_dim = j.at("d").get<std::uint32_t>();
  s.num_classes = j.at("c").get<std::uint32_t>();
  s.hidden_dim = j.at("h").get<std::uint32_t>();
  return s;
}

json matrix_json(const LossMatrix& m) {
  return {{"validators", m.validator_ids}, {"workers", m.worker_ids}, {"entries", b64_reals(m.entries)}};
}

LossMatrix matrix_of(const json& j) {
  LossMatrix m;
  m.validator_ids = j.at("validators").get<std::vector<ParticipantId>>();
  m.worker_ids = j.at("workers").get<std::vector<ParticipantId>>();
  m.entries = reals_of(j.at("entries"));
  return m;
}

json block_json(const Block& b) {
  json j;
  j["round"] = b.round;
  j["prev_hash"] = base64_encode(b.prev_hash);
  j["role_seed"] = base64_encode(b.role_seed);
  j["roles"] = {{"round", b.roles.round},
                {"miner", b.roles.miner},
                {"validators", b.roles.validators},
                {"workers", b.roles.workers}};
  json swaps = json::array();
  for (const auto& s : b.role_swaps) swaps.push_back({s.validator_out, s.worker_in});
  j["role_swaps"] = swaps;
  j["aggregator"] = to_string(b.rule.kind);
  j["krum_f"] = b.rule.krum_f;
  j["shape"] = shape_json(b.global_weight.shape);
  json weight_shapes = json::array();
  for (const auto& [id, p] : b.worker_weights) weight_shapes.push_back({{"id", id}, {"shape", shape_json(p.shape)}});
  j["worker_weights"] = weight_shapes;
  json sizes = json::array();
  for (const auto& [id, n] : b.worker_sample_sizes) sizes.push_back({id, n});
  j["sample_sizes"] = sizes;
  j["loss_matrix"] = matrix_json(b.loss_matrix);
  j["accuracy_matrix"] = b.accuracy_matrix ? matrix_json(*b.accuracy_matrix) : json(nullptr);
  j["scores"] = b64_reals(b.scores.scores);
  if (b.genesis) {
    json stakes = json::array();
    std::vector<double> values;
    for (const auto& [id, s] : b.genesis->ledger.stakes()) {
      stakes.push_back(id);
      values.push_back(s);
    }
    j["genesis"] = {{"ids", stakes},
                    {"stakes", b64_reals(values)},
                    {"workers", b.genesis->num_workers},
                    {"validators", b.genesis->num_validators}};
  } else {
    j["genesis"] = nullptr;
  }
  j["block_hash"] = base64_encode(b.block_hash);
  return j;
}

ParamVector read_vector(ByteReader& r, const Shape& shape) {
  const std::uint32_t len = r.u32();
  if (len != shape.parameter_count()) throw IngestionError("weight sidecar: vector length does not match shape");
  if (static_cast<std::size_t>(len) * 8 > r.remaining()) throw IngestionError("weight sidecar: truncated vector");
  ParamVector p;
  p.shape = shape;
  p.values.resize(len);
  for (auto& v : p.values) v = r.f64();
  return p;
}

Block block_of(const json& j, ByteReader& weights) {
  Block b;
  b.round = j.at("round").get<std::uint64_t>();
  b.prev_hash = fixed_bytes<32>(j.at("prev_hash"));
  b.role_seed = fixed_bytes<8>(j.at("role_seed"));
  const auto& roles = j.at("roles");
  b.roles.round = roles.at("round").get<std::uint64_t>();
  b.roles.miner = roles.at("miner").get<ParticipantId>();
  b.roles.validators = roles.at("validators").get<std::vector<ParticipantId>>();
  b.roles.workers = roles.at("workers").get<std::vector<ParticipantId>>();
  for (const auto& s : j.at("role_swaps")) {
    if (!s.is_array() || s.size() != 2) throw IngestionError("role swap must be a pair");
    b.role_swaps.push_back({s[0].get<ParticipantId>(), s[1].get<ParticipantId>()});
  }
  b.rule.kind = aggregator_from_string(j.at("aggregator").get<std::string>());
  b.rule.krum_f = j.at("krum_f").get<std::uint32_t>();
  for (const auto& s : j.at("sample_sizes")) {
    if (!s.is_array() || s.size() != 2) throw IngestionError("sample size entry must be a pair");
    if (!b.worker_sample_sizes.emplace(s[0].get<ParticipantId>(), s[1].get<std::uint64_t>()).second) {
      throw IngestionError("duplicate sample size entry");
    }
  }
  b.loss_matrix = matrix_of(j.at("loss_matrix"));
  if (!j.at("accuracy_matrix").is_null()) b.accuracy_matrix = matrix_of(j.at("accuracy_matrix"));
  b.scores.scores = reals_of(j.at("scores"));
  if (const auto& g = j.at("genesis"); !g.is_null()) {
    const auto ids = g.at("ids").get<std::vector<ParticipantId>>();
    const auto stakes = reals_of(g.at("stakes"));
    if (ids.size() != stakes.size()) throw IngestionError("genesis ids/stakes length mismatch");
    GenesisParams params;
    for (std::size_t i = 0; i < ids.size(); ++i) {
      if (params.ledger.contains(ids[i])) throw IngestionError("duplicate genesis stake id");
      params.ledger.set_stake(ids[i], stakes[i]);
    }
    params.num_workers = g.at("workers").get<std::uint32_t>();
    params.num_validators = g.at("validators").get<std::uint32_t>();
    b.genesis = std::move(params);
  }
  b.block_hash = fixed_bytes<32>(j.at("block_hash"));

  if (weights.u64() != b.round) throw IngestionError("weight sidecar out of step with block rounds");
  const std::uint32_t count = weights.u32();
  const auto& shapes = j.at("worker_weights");
  if (count != shapes.size() + 1) throw IngestionError("weight sidecar vector count mismatch");
  b.global_weight = read_vector(weights, shape_of(j.at("shape")));
  for (const auto& entry : shapes) {
    const auto id = entry.at("id").get<ParticipantId>();
    if (!b.worker_weights.emplace(id, read_vector(weights, shape_of(entry.at("shape")))).second) {
      throw IngestionError("duplicate worker weight id");
    }
  }
  return b;
}

std::vector<std::uint8_t> slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw IngestionError("cannot open " + p.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

void write_chain_streams(std::span<const Block> blocks, std::string& jsonl, std::vector<std::uint8_t>& weights) {
  jsonl.clear();
  ByteWriter w;
  w.bytes({reinterpret_cast<const std::uint8_t*>(kMagic.data()), kMagic.size()});
  for (const auto& b : blocks) {
    jsonl += block_json(b).dump();
    jsonl += '\n';
    w.u64(b.round);
    w.u32(static_cast<std::uint32_t>(b.worker_weights.size() + 1));
    w.u32(static_cast<std::uint32_t>(b.global_weight.size()));
    w.reals(b.global_weight.values);
    for (const auto& [id, p] : b.worker_weights) {
      w.u32(static_cast<std::uint32_t>(p.size()));
      w.reals(p.values);
    }
  }
  weights = w.take();
}

void write_chain(std::span<const Block> blocks, const ChainFiles& files) {
  std::string jsonl;
  std::vector<std::uint8_t> weights;
  write_chain_streams(blocks, jsonl, weights);
  std::ofstream j(files.jsonl, std::ios::binary);
  std::ofstream w(files.weights, std::ios::binary);
  if (!j || !w) throw IngestionError("cannot write chain files at " + files.jsonl.string());
  j.write(jsonl.data(), static_cast<std::streamsize>(jsonl.size()));
  w.write(reinterpret_cast<const char*>(weights.data()), static_cast<std::streamsize>(weights.size()));
}

std::vector<Block> read_chain_streams(const std::string& jsonl, std::span<const std::uint8_t> weights) {
  if (weights.size() < kMagic.size() || !std::equal(kMagic.begin(), kMagic.end(), weights.begin())) {
    throw IngestionError("weight sidecar: bad magic");
  }
  ByteReader reader(weights.subspan(kMagic.size()));
  std::vector<Block> blocks;
  std::size_t start = 0, line_no = 0;
  while (start < jsonl.size()) {
    ++line_no;
    const auto end = jsonl.find('\n', start);
    if (end == std::string::npos) throw IngestionError("chain.jsonl: missing trailing newline");
    const std::string_view line(jsonl.data() + start, end - start);
    start = end + 1;
    try {
      const json j = json::parse(line);
      if (j.dump() != line) throw IngestionError("not in canonical form");
      blocks.push_back(block_of(j, reader));
    } catch (const std::exception& e) {
      throw IngestionError("chain.jsonl line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  if (reader.remaining() != 0) throw IngestionError("weight sidecar: trailing bytes");
  if (blocks.empty()) throw IngestionError("chain.jsonl: no blocks");
  return blocks;
}

std::vector<Block> read_chain(const ChainFiles& files) {
  const auto raw = slurp(files.jsonl);
  return read_chain_streams(std::string(raw.begin(), raw.end()), slurp(files.weights));
}

ValidationResult validate_chain_bytes(const std::string& jsonl, std::span<const std::uint8_t> weights) {
  std::vector<Block> blocks;
  try {
    blocks = read_chain_streams(jsonl, weights);
  } catch (const std::exception& e) {
    return ValidationResult::fault(FaultCode::kMalformed, 0, e.what());
  }
  return validate_chain(blocks);
}

ValidationResult validate_chain_files(const ChainFiles& files) {
  std::vector<Block> blocks;
  try {
    blocks = read_chain(files);
  } catch (const std::exception& e) {
    return ValidationResult::fault(FaultCode::kMalformed, 0, e.what());
  }
  return validate_chain(blocks);
}

}  // namespace sabfl
