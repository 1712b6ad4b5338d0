#include "fluidity/codec.hpp"

#include <limits>

namespace fluidity {

using nlohmann::json;

DecodeError::DecodeError(std::string field, std::size_t byte_offset, const std::string& message)
    : std::runtime_error(message), field_(std::move(field)), byte_offset_(byte_offset) {}

namespace {

constexpr std::size_t kNoOffset = std::numeric_limits<std::size_t>::max();

// Typed access into a decoded object with path-carrying errors.
class Reader {
 public:
  Reader(const json& node, std::string path) : node_(node), path_(std::move(path)) {
    if (!node_.is_object()) throw DecodeError(path_, kNoOffset, "expected an object at '" + path_ + "'");
  }

  const json& at(const std::string& key) const {
    auto it = node_.find(key);
    if (it == node_.end()) {
      throw DecodeError(child(key), kNoOffset, "missing field '" + child(key) + "'");
    }
    return *it;
  }

  bool has(const std::string& key) const { return node_.contains(key); }

  template <typename T>
  T get(const std::string& key) const {
    const json& v = at(key);
    try {
      return v.get<T>();
    } catch (const json::exception&) {
      throw DecodeError(child(key), kNoOffset, "wrong type for field '" + child(key) + "'");
    }
  }

  Reader object(const std::string& key) const { return Reader(at(key), child(key)); }

  const json& array(const std::string& key) const {
    const json& v = at(key);
    if (!v.is_array()) throw DecodeError(child(key), kNoOffset, "expected an array at '" + child(key) + "'");
    return v;
  }

  std::string child(const std::string& key) const { return path_ + "/" + key; }

 private:
  const json& node_;
  std::string path_;
};

std::string dump(const json& j) { return j.dump(2) + "\n"; }

json to_json(const SeedImage& s) {
  json j{{"id", s.id}, {"path", s.path.generic_string()}};
  j["category_label"] = s.category_label ? json(*s.category_label) : json(nullptr);
  return j;
}

SeedImage seed_from(const Reader& r) {
  SeedImage s;
  s.id = r.get<std::string>("id");
  s.path = r.get<std::string>("path");
  const json& label = r.at("category_label");
  if (!label.is_null()) s.category_label = r.get<std::string>("category_label");
  return s;
}

json to_json(const Caption& c) {
  return {{"text", c.text}, {"generator_id", c.generator_id}, {"step_index", c.step_index}};
}

Caption caption_from(const Reader& r) {
  return {r.get<std::string>("text"), r.get<std::string>("generator_id"), r.get<int>("step_index")};
}

json to_json(const LabelSet& l) { return {{"detector_id", l.detector_id}, {"labels", l.labels}}; }

LabelSet labels_from(const Reader& r) {
  return {r.get<std::string>("detector_id"), r.get<std::vector<std::string>>("labels")};
}

json to_json(const StepMetrics& m) {
  return {{"compat_score", m.compat_score},
          {"detector_a_sim", m.detector_a_sim},
          {"detector_b_sim", m.detector_b_sim},
          {"label_semantic_score", m.label_semantic_score},
          {"caption_semantic_score", m.caption_semantic_score},
          {"caption_labels_missing", m.caption_labels_missing}};
}

StepMetrics metrics_from(const Reader& r) {
  StepMetrics m;
  m.compat_score = r.get<double>("compat_score");
  m.detector_a_sim = r.get<double>("detector_a_sim");
  m.detector_b_sim = r.get<double>("detector_b_sim");
  m.label_semantic_score = r.get<double>("label_semantic_score");
  m.caption_semantic_score = r.get<double>("caption_semantic_score");
  m.caption_labels_missing = r.get<bool>("caption_labels_missing");
  return m;
}

json to_json(const BreakageFlags& f) {
  return {{"by_compat", f.by_compat}, {"by_semantics", f.by_semantics}, {"by_labels", f.by_labels}, {"broken", f.broken}};
}

BreakageFlags flags_from(const Reader& r) {
  return {r.get<bool>("by_compat"), r.get<bool>("by_semantics"), r.get<bool>("by_labels"), r.get<bool>("broken")};
}

json to_json(const Combo& c) {
  return {{"image_generator_id", c.image_generator_id}, {"captioner_id", c.captioner_id}};
}

Combo combo_from(const Reader& r) {
  return {r.get<std::string>("image_generator_id"), r.get<std::string>("captioner_id")};
}

}  // namespace

json to_json(const Thresholds& t) {
  return {{"compat_min", t.compat_min}, {"semantic_min", t.semantic_min}, {"label_min", t.label_min}};
}

Thresholds thresholds_from_json(const json& j, const std::string& path) {
  Reader r(j, path);
  return {r.get<double>("compat_min"), r.get<double>("semantic_min"), r.get<double>("label_min")};
}

json to_json(const BackendDescriptor& d) {
  return {{"role", std::string(to_string(d.role))},
          {"backend_id", d.backend_id},
          {"endpoint", d.endpoint},
          {"params", d.params},
          {"rng_seed", d.rng_seed}};
}

BackendDescriptor descriptor_from_json(const json& j, const std::string& path) {
  Reader r(j, path);
  BackendDescriptor d;
  auto role = parse_role(r.get<std::string>("role"));
  if (!role) throw DecodeError(r.child("role"), kNoOffset, "unknown backend role at '" + r.child("role") + "'");
  d.role = *role;
  d.backend_id = r.get<std::string>("backend_id");
  d.endpoint = r.get<std::string>("endpoint");
  if (r.has("params")) d.params = r.get<std::map<std::string, std::string>>("params");
  if (r.has("rng_seed")) d.rng_seed = r.get<std::uint64_t>("rng_seed");
  return d;
}

json parse_tracked(std::string_view bytes) {
  std::vector<std::string> stack;
  std::string pending;
  auto callback = [&](int, json::parse_event_t event, json& parsed) {
    switch (event) {
      case json::parse_event_t::key:
        pending = parsed.get<std::string>();
        break;
      case json::parse_event_t::object_start:
      case json::parse_event_t::array_start:
        stack.push_back(pending);
        pending.clear();
        break;
      case json::parse_event_t::object_end:
      case json::parse_event_t::array_end:
        if (!stack.empty()) stack.pop_back();
        pending.clear();
        break;
      case json::parse_event_t::value:
        break;
    }
    return true;
  };
  try {
    return json::parse(bytes.begin(), bytes.end(), callback);
  } catch (const json::parse_error& e) {
    std::string path;
    for (const auto& key : stack) {
      if (!key.empty()) path += "/" + key;
    }
    if (!pending.empty()) path += "/" + pending;
    const std::size_t offset = e.byte;
    throw DecodeError(path, offset,
                      "malformed input at byte " + std::to_string(offset) + " while reading field '" +
                          (path.empty() ? std::string("/") : path) + "'");
  }
}

std::string encode_record(const ChainRecord& record) {
  json steps = json::array();
  for (const auto& s : record.steps) {
    steps.push_back({{"index", s.index},
                     {"caption", to_json(s.caption)},
                     {"image_path", s.image_path},
                     {"labels_a", to_json(s.labels_a)},
                     {"labels_b", to_json(s.labels_b)},
                     {"metrics", to_json(s.metrics)},
                     {"flags", to_json(s.flags)}});
  }
  json j{{"format", "fluidity.chain.v1"},
         {"seed", to_json(record.seed)},
         {"seed_caption", to_json(record.seed_caption)},
         {"seed_labels_a", to_json(record.seed_labels_a)},
         {"seed_labels_b", to_json(record.seed_labels_b)},
         {"steps", steps},
         {"chain_length", record.chain_length},
         {"combo", to_json(record.combo)},
         {"thresholds", to_json(record.thresholds)},
         {"rng_seed", record.rng_seed},
         {"complete", record.complete}};
  return dump(j);
}

ChainRecord decode_record(std::string_view bytes) {
  const json root = parse_tracked(bytes);
  Reader r(root, "");
  if (r.get<std::string>("format") != "fluidity.chain.v1") {
    throw DecodeError("/format", kNoOffset, "unsupported chain record format");
  }
  ChainRecord record;
  record.seed = seed_from(r.object("seed"));
  record.seed_caption = caption_from(r.object("seed_caption"));
  record.seed_labels_a = labels_from(r.object("seed_labels_a"));
  record.seed_labels_b = labels_from(r.object("seed_labels_b"));
  const json& steps = r.array("steps");
  for (std::size_t i = 0; i < steps.size(); ++i) {
    Reader s(steps[i], "/steps/" + std::to_string(i));
    ChainStep step;
    step.index = s.get<int>("index");
    step.caption = caption_from(s.object("caption"));
    step.image_path = s.get<std::string>("image_path");
    step.labels_a = labels_from(s.object("labels_a"));
    step.labels_b = labels_from(s.object("labels_b"));
    step.metrics = metrics_from(s.object("metrics"));
    step.flags = flags_from(s.object("flags"));
    record.steps.push_back(std::move(step));
  }
  record.chain_length = r.get<int>("chain_length");
  record.combo = combo_from(r.object("combo"));
  record.thresholds = thresholds_from_json(r.at("thresholds"), "/thresholds");
  record.rng_seed = r.get<std::uint64_t>("rng_seed");
  record.complete = r.get<bool>("complete");
  return record;
}

std::string encode_manifest(const RunManifest& m) {
  json failed = json::array();
  for (const auto& f : m.failed_chains) {
    failed.push_back({{"seed_id", f.seed_id}, {"step", f.step}, {"message", f.message}});
  }
  json backends = json::array();
  for (const auto& b : m.backends) backends.push_back(to_json(b));
  json j{{"format", "fluidity.manifest.v1"},
         {"run_id", m.run_id},
         {"combo", to_json(m.combo)},
         {"seed_set_id", m.seed_set_id},
         {"thresholds", to_json(m.thresholds)},
         {"completed_chain_ids", m.completed_chain_ids},
         {"failed_chains", failed},
         {"rng_seed", m.rng_seed},
         {"backends", backends}};
  return dump(j);
}

RunManifest decode_manifest(std::string_view bytes) {
  const json root = parse_tracked(bytes);
  Reader r(root, "");
  if (r.get<std::string>("format") != "fluidity.manifest.v1") {
    throw DecodeError("/format", kNoOffset, "unsupported manifest format");
  }
  RunManifest m;
  m.run_id = r.get<std::string>("run_id");
  m.combo = combo_from(r.object("combo"));
  m.seed_set_id = r.get<std::string>("seed_set_id");
  m.thresholds = thresholds_from_json(r.at("thresholds"), "/thresholds");
  for (const auto& id : r.get<std::vector<std::string>>("completed_chain_ids")) m.completed_chain_ids.insert(id);
  const json& failed = r.array("failed_chains");
  for (std::size_t i = 0; i < failed.size(); ++i) {
    Reader f(failed[i], "/failed_chains/" + std::to_string(i));
    m.failed_chains.push_back({f.get<std::string>("seed_id"), f.get<int>("step"), f.get<std::string>("message")});
  }
  m.rng_seed = r.get<std::uint64_t>("rng_seed");
  const json& backends = r.array("backends");
  for (std::size_t i = 0; i < backends.size(); ++i) {
    m.backends.push_back(descriptor_from_json(backends[i], "/backends/" + std::to_string(i)));
  }
  return m;
}

std::string encode_seed_set(const std::vector<SeedImage>& seeds) {
  json list = json::array();
  for (const auto& s : seeds) list.push_back(to_json(s));
  return dump(json{{"format", "fluidity.seeds.v1"}, {"seeds", list}});
}

std::vector<SeedImage> decode_seed_set(std::string_view bytes) {
  const json root = parse_tracked(bytes);
  Reader r(root, "");
  if (r.get<std::string>("format") != "fluidity.seeds.v1") {
    throw DecodeError("/format", kNoOffset, "unsupported seed set format");
  }
  std::vector<SeedImage> seeds;
  const json& list = r.array("seeds");
  for (std::size_t i = 0; i < list.size(); ++i) seeds.push_back(seed_from(Reader(list[i], "/seeds/" + std::to_string(i))));
  return seeds;
}

}  // namespace fluidity
