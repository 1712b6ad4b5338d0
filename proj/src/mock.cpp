#include "fluidity/mock.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <set>
#include <sstream>
#include <stdexcept>

#include "fluidity/keywords.hpp"
#include "fluidity/rng.hpp"
#include "fluidity/run_dir.hpp"

namespace fluidity {

using nlohmann::json;

namespace {

constexpr double kSameCategoryCosine = 0.6;
constexpr std::size_t kUnknownBuckets = 32;
constexpr std::size_t kPixelDims = 16;
constexpr std::size_t kControlCloseUpEvery = 5;
constexpr std::size_t kControlCloseUpDetails = 2;

std::vector<std::string> lower_tokens(std::string_view text) {
  std::vector<std::string> tokens;
  std::string cur;
  for (char c : text) {
    if (std::isalnum(static_cast<unsigned char>(c))) {
      cur += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    } else if (!cur.empty()) {
      tokens.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) tokens.push_back(std::move(cur));
  return tokens;
}

json error(const std::string& kind, const std::string& message) {
  return {{"ok", false}, {"error", {{"kind", kind}, {"message", message}}}};
}

json ok(json result) { return {{"ok", true}, {"result", std::move(result)}}; }

struct RequestError {
  std::string kind;
  std::string message;
};

std::string param(const json& request, const std::string& key, const std::string& fallback) {
  const json& params = request["params"];
  auto it = params.find(key);
  if (it == params.end()) return fallback;
  if (!it->is_string()) throw RequestError{"bad_request", "param '" + key + "' must be a string"};
  return it->get<std::string>();
}

double probability_param(const json& request, const std::string& key, double fallback) {
  const std::string text = param(request, key, "");
  if (text.empty()) return fallback;
  double v = 0.0;
  try {
    v = std::stod(text);
  } catch (const std::exception&) {
    throw RequestError{"bad_request", "param '" + key + "' is not a number"};
  }
  if (!(v >= 0.0 && v <= 1.0)) throw RequestError{"bad_request", "param '" + key + "' must lie in [0,1]"};
  return v;
}

std::string article_for(std::string_view word) {
  return !word.empty() && std::string_view("aeiou").find(word.front()) != std::string_view::npos ? "an" : "a";
}

}  // namespace

std::string Scene::serialize() const {
  std::string out = "scene v1\n";
  for (const auto& o : objects) out += "object " + o + "\n";
  for (const auto& a : attributes) out += "attr " + a + "\n";
  for (const auto& d : details) out += "detail " + d + "\n";
  return out;
}

Scene Scene::parse(std::string_view text) {
  Scene scene;
  std::istringstream in{std::string(text)};
  std::string line;
  if (!std::getline(in, line) || line != "scene v1") throw std::invalid_argument("not a scene: missing 'scene v1' header");
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto space = line.find(' ');
    if (space == std::string::npos || space + 1 >= line.size()) throw std::invalid_argument("malformed scene line: " + line);
    const std::string key = line.substr(0, space);
    const std::string value = line.substr(space + 1);
    if (key == "object") {
      scene.objects.push_back(value);
    } else if (key == "attr") {
      scene.attributes.push_back(value);
    } else if (key == "detail") {
      scene.details.push_back(value);
    } else {
      throw std::invalid_argument("unknown scene key: " + key);
    }
  }
  return scene;
}

MockOntology MockOntology::default_ontology() {
  MockOntology o;
  o.categories = {{"vehicles", {"truck", "car", "bus"}},
                  {"scenery", {"road", "tree", "forest"}},
                  {"food", {"broccoli", "mushroom", "bowl"}},
                  {"drink", {"wine", "beer", "glass"}}};
  o.adjacency = {{"truck", {"car", "bus", "road"}},        {"car", {"truck", "bus", "road"}},
                 {"bus", {"truck", "car", "road"}},        {"road", {"tree", "forest", "truck"}},
                 {"tree", {"forest", "road", "broccoli"}}, {"forest", {"tree", "road", "mushroom"}},
                 {"broccoli", {"mushroom", "bowl", "tree"}}, {"mushroom", {"broccoli", "bowl", "forest"}},
                 {"bowl", {"broccoli", "mushroom", "glass"}}, {"wine", {"beer", "glass", "bowl"}},
                 {"beer", {"wine", "glass", "bowl"}},      {"glass", {"wine", "beer", "bowl"}}};
  o.attributes = {"red", "blue", "green", "yellow", "white", "black"};
  o.details = {"large", "small", "parked", "old", "wooden", "shiny", "busy", "sunny", "empty", "fresh"};
  return o;
}

std::vector<std::string> MockOntology::concepts() const {
  std::vector<std::string> out;
  for (const auto& [name, members] : categories) out.insert(out.end(), members.begin(), members.end());
  return out;
}

void MockOntology::validate() const {
  if (categories.empty()) throw std::invalid_argument("ontology has no categories");
  std::set<std::string> seen;
  for (const auto& [name, members] : categories) {
    if (members.empty()) throw std::invalid_argument("category '" + name + "' is empty");
    for (const auto& c : members) {
      if (!seen.insert(c).second) throw std::invalid_argument("concept '" + c + "' appears in more than one category");
    }
  }
  for (const auto& c : seen) {
    auto it = adjacency.find(c);
    if (it == adjacency.end() || it->second.empty()) throw std::invalid_argument("concept '" + c + "' has no drift candidates");
    for (const auto& n : it->second) {
      if (!seen.contains(n)) throw std::invalid_argument("drift candidate '" + n + "' is not a concept");
      if (n == c) throw std::invalid_argument("concept '" + c + "' lists itself as a drift candidate");
    }
  }
  for (const auto& [c, _] : adjacency) {
    if (!seen.contains(c)) throw std::invalid_argument("adjacency names unknown concept '" + c + "'");
  }
  for (const auto& a : attributes) {
    if (seen.contains(a)) throw std::invalid_argument("attribute '" + a + "' collides with a concept");
  }
  for (const auto& d : details) {
    if (seen.contains(d) || std::find(attributes.begin(), attributes.end(), d) != attributes.end()) {
      throw std::invalid_argument("detail '" + d + "' collides with a concept or attribute");
    }
  }
}

std::optional<std::size_t> MockOntology::category_of(std::string_view concept_name) const {
  for (std::size_t i = 0; i < categories.size(); ++i) {
    const auto& members = categories[i].second;
    if (std::find(members.begin(), members.end(), concept_name) != members.end()) return i;
  }
  return std::nullopt;
}

std::optional<std::size_t> MockOntology::concept_index(std::string_view concept_name) const {
  std::size_t i = 0;
  for (const auto& [name, members] : categories) {
    for (const auto& c : members) {
      if (c == concept_name) return i;
      ++i;
    }
  }
  return std::nullopt;
}

std::optional<std::size_t> MockOntology::attribute_index(std::string_view attribute) const {
  auto it = std::find(attributes.begin(), attributes.end(), attribute);
  if (it == attributes.end()) return std::nullopt;
  return static_cast<std::size_t>(it - attributes.begin());
}

std::optional<std::string> MockOntology::match_concept(std::string_view token) const {
  if (concept_index(token)) return std::string(token);
  if (token.size() > 1 && token.back() == 's' && concept_index(token.substr(0, token.size() - 1))) {
    return std::string(token.substr(0, token.size() - 1));
  }
  if (token.size() > 2 && token.ends_with("es") && concept_index(token.substr(0, token.size() - 2))) {
    return std::string(token.substr(0, token.size() - 2));
  }
  return std::nullopt;
}

MockService::MockService(MockOntology ontology, MockGeometry geometry)
    : ontology_(std::move(ontology)), geometry_(geometry) {
  ontology_.validate();
  category_offset_ = 0;
  concept_offset_ = category_offset_ + ontology_.categories.size();
  attribute_offset_ = concept_offset_ + ontology_.concepts().size();
  unknown_offset_ = attribute_offset_ + ontology_.attributes.size();
  null_offset_ = unknown_offset_ + kUnknownBuckets;
  pixel_offset_ = null_offset_ + 1;
  dim_ = pixel_offset_ + kPixelDims;
}

std::size_t MockService::embedding_dim() const { return dim_; }

std::uint64_t MockService::calls(std::string_view route) const {
  if (route == "/caption") return caption_calls_.load();
  if (route == "/generate") return generate_calls_.load();
  if (route == "/labels") return labels_calls_.load();
  if (route == "/embed") return embed_calls_.load();
  return 0;
}

void MockService::reset_counts() {
  total_calls_ = 0;
  caption_calls_ = 0;
  generate_calls_ = 0;
  labels_calls_ = 0;
  embed_calls_ = 0;
}

void MockService::set_default_drift(double drift) {
  if (!(drift >= 0.0 && drift <= 1.0)) throw std::invalid_argument("drift must lie in [0,1]");
  default_drift_ = drift;
}

std::vector<double> MockService::semantic_vector(const std::vector<std::string>& concepts_in_order,
                                                 const std::vector<std::string>& attributes,
                                                 const std::vector<std::string>& other_tokens) const {
  std::vector<double> v(dim_, 0.0);
  const double cat_part = std::sqrt(kSameCategoryCosine);
  const double own_part = std::sqrt(1.0 - kSameCategoryCosine);
  double weight = 1.0;
  for (const auto& c : concepts_in_order) {
    v[category_offset_ + *ontology_.category_of(c)] += weight * cat_part;
    v[concept_offset_ + *ontology_.concept_index(c)] += weight * own_part;
    weight *= geometry_.concept_decay;
  }
  for (const auto& a : attributes) v[attribute_offset_ + *ontology_.attribute_index(a)] += geometry_.attribute_weight;
  for (const auto& t : other_tokens) v[unknown_offset_ + fnv1a64(t) % kUnknownBuckets] += geometry_.unknown_weight;
  if (std::all_of(v.begin(), v.end(), [](double x) { return x == 0.0; })) v[null_offset_] = 1.0;
  return v;
}

std::vector<double> MockService::embed_text(std::string_view text) const {
  std::vector<std::string> found;
  std::vector<std::string> attrs;
  std::vector<std::string> other;
  const auto& stop = default_stopwords();
  for (const auto& token : lower_tokens(text)) {
    if (auto c = ontology_.match_concept(token)) {
      if (std::find(found.begin(), found.end(), *c) == found.end()) found.push_back(*c);
    } else if (ontology_.attribute_index(token)) {
      if (std::find(attrs.begin(), attrs.end(), token) == attrs.end()) attrs.push_back(token);
    } else if (!stop.contains(token) && token.size() > 1) {
      other.push_back(token);
    }
  }
  return semantic_vector(found, attrs, other);
}

std::vector<double> MockService::embed_image(const Image& image) const {
  const Scene scene = Scene::parse(image.bytes);
  std::vector<std::string> found;
  std::vector<std::string> other;
  for (const auto& o : scene.objects) {
    if (ontology_.concept_index(o)) {
      if (std::find(found.begin(), found.end(), o) == found.end()) found.push_back(o);
    } else {
      other.push_back(o);
    }
  }
  other.insert(other.end(), scene.details.begin(), scene.details.end());
  std::vector<std::string> attrs;
  for (const auto& a : scene.attributes) {
    if (ontology_.attribute_index(a)) attrs.push_back(a);
  }
  std::vector<double> v = semantic_vector(found, attrs, other);
  double norm = 0.0;
  for (double x : v) norm += x * x;
  norm = std::sqrt(norm);
  for (double& x : v) x *= geometry_.image_text_alignment / norm;

  Rng rng(fnv1a64(image.bytes));
  std::vector<double> pixel(kPixelDims);
  double pnorm = 0.0;
  for (double& x : pixel) {
    x = rng.normal();
    pnorm += x * x;
  }
  pnorm = std::sqrt(pnorm);
  const double rest = std::sqrt(1.0 - geometry_.image_text_alignment * geometry_.image_text_alignment);
  for (std::size_t i = 0; i < kPixelDims; ++i) v[pixel_offset_ + i] = rest * pixel[i] / pnorm;
  return v;
}

std::string MockService::caption_for(const Scene& scene, std::size_t max_words) const {
  if (scene.objects.empty()) throw RequestError{"empty_scene", "scene has no objects to describe"};
  std::vector<std::string> words;
  const std::string& subject = scene.objects.front();
  const std::string first =
      !scene.details.empty() ? scene.details.front() : !scene.attributes.empty() ? scene.attributes.front() : subject;
  words.push_back(article_for(first));
  for (const auto& d : scene.details) words.push_back(d);
  for (const auto& a : scene.attributes) words.push_back(a);
  words.push_back(subject);
  if (scene.objects.size() >= 2) {
    const auto& context = scene.objects[1];
    const auto a = ontology_.category_of(subject);
    const auto b = ontology_.category_of(context);
    words.push_back(a && b && *a == *b ? "near" : "on");
    words.push_back(article_for(context));
    words.push_back(context);
  }
  for (std::size_t i = 2; i < scene.objects.size(); ++i) {
    words.push_back("with");
    words.push_back(article_for(scene.objects[i]));
    words.push_back(scene.objects[i]);
  }
  if (max_words > 0 && words.size() > max_words) words.resize(max_words);
  std::string out;
  for (const auto& w : words) {
    if (!out.empty()) out += ' ';
    out += w;
  }
  return out;
}

Scene MockService::parse_prompt(std::string_view prompt) const {
  Scene scene;
  for (const auto& token : lower_tokens(prompt)) {
    if (auto c = ontology_.match_concept(token)) {
      if (std::find(scene.objects.begin(), scene.objects.end(), *c) == scene.objects.end()) scene.objects.push_back(*c);
    } else if (ontology_.attribute_index(token)) {
      if (std::find(scene.attributes.begin(), scene.attributes.end(), token) == scene.attributes.end()) {
        scene.attributes.push_back(token);
      }
    }
  }
  return scene;
}

Scene MockService::generate(std::string_view prompt, double drift, double attribute_drift, std::uint64_t seed) const {
  Scene scene = parse_prompt(prompt);
  Rng rng(seed);
  // Draw every variate up front so the stream does not depend on which branch runs.
  const double u_subject = rng.uniform();
  const double u_attribute = rng.uniform();
  const std::uint64_t pick_subject = rng.next();
  const std::uint64_t pick_other = rng.next();

  if (!scene.objects.empty() && u_subject < drift) {
    const auto& candidates = ontology_.adjacency.at(scene.objects.front());
    const std::string replacement = candidates[pick_subject % candidates.size()];
    auto clash = std::find(scene.objects.begin() + 1, scene.objects.end(), replacement);
    if (clash != scene.objects.end()) {
      // The old context became the subject; pull in a new context next to it.
      const auto& near = ontology_.adjacency.at(replacement);
      std::string fresh;
      for (std::size_t k = 0; k < near.size(); ++k) {
        const auto& n = near[(pick_other + k) % near.size()];
        if (n != scene.objects.front() && std::find(scene.objects.begin(), scene.objects.end(), n) == scene.objects.end()) {
          fresh = n;
          break;
        }
      }
      if (fresh.empty()) {
        scene.objects.erase(clash);
      } else {
        *clash = fresh;
      }
    }
    scene.objects.front() = replacement;
  }
  if (!scene.attributes.empty() && ontology_.attributes.size() > 1 && u_attribute < attribute_drift) {
    std::vector<std::string> others;
    for (const auto& a : ontology_.attributes) {
      if (a != scene.attributes.front()) others.push_back(a);
    }
    scene.attributes.front() = others[pick_other % others.size()];
  }
  return scene;
}

std::vector<std::string> MockService::labels_for(const Scene& scene, std::string_view detector) const {
  std::vector<std::string> out;
  for (const auto& o : scene.objects) {
    if (std::find(out.begin(), out.end(), o) == out.end()) out.push_back(o);
  }
  if (detector == "primary" && out.size() > 1) out.resize(1);
  return out;
}

json MockService::post(std::string_view route, const json& request) {
  ++total_calls_;
  if (route == "/health") return {{"ok", true}};
  if (route == "/caption") ++caption_calls_;
  else if (route == "/generate") ++generate_calls_;
  else if (route == "/labels") ++labels_calls_;
  else if (route == "/embed") ++embed_calls_;
  else return error("not_found", "unknown route " + std::string(route));

  try {
    if (!request.is_object() || !request.contains("input") || !request["input"].is_string()) {
      throw RequestError{"bad_request", "request needs a string 'input'"};
    }
    if (!request.contains("params") || !request["params"].is_object()) {
      throw RequestError{"bad_request", "request needs a 'params' object"};
    }
    if (!request.contains("seed") || !request["seed"].is_number_integer()) {
      throw RequestError{"bad_request", "request needs an integer 'seed'"};
    }
    const std::string input = request["input"].get<std::string>();
    const std::uint64_t salt = seed_salt_.load();
    const std::uint64_t seed = salt == 0 ? request["seed"].get<std::uint64_t>() : splitmix64(request["seed"].get<std::uint64_t>() ^ salt);

    auto decode_scene = [&]() {
      const std::string media = param(request, "media_type", std::string(kSceneMediaType));
      if (media != kSceneMediaType) throw RequestError{"unsupported_media", "mock backends only read " + std::string(kSceneMediaType)};
      std::string bytes;
      try {
        bytes = base64_decode(input);
      } catch (const std::invalid_argument& e) {
        throw RequestError{"bad_request", std::string("input is not base64: ") + e.what()};
      }
      try {
        return Scene::parse(bytes);
      } catch (const std::invalid_argument& e) {
        throw RequestError{"unsupported_media", e.what()};
      }
    };

    if (route == "/caption") {
      const std::size_t max_words = static_cast<std::size_t>(std::stoul(param(request, "max_caption_length", "50")));
      return ok(caption_for(decode_scene(), max_words));
    }
    if (route == "/generate") {
      if (input.find_first_not_of(" \t\r\n") == std::string::npos) throw RequestError{"bad_request", "empty prompt"};
      const double drift = probability_param(request, "drift", default_drift_.load());
      const double attribute_drift = probability_param(request, "attribute_drift", 0.0);
      const Scene scene = generate(input, drift, attribute_drift, seed);
      return ok({{"media_type", std::string(kSceneMediaType)}, {"data", base64_encode(scene.serialize())}});
    }
    if (route == "/labels") {
      return ok(labels_for(decode_scene(), param(request, "detector", "objects")));
    }
    const std::string modality = param(request, "modality", "text");
    if (modality == "image") return ok(embed_image(decode_scene().to_image()));
    if (modality != "text") throw RequestError{"bad_request", "unknown modality " + modality};
    if (input.find_first_not_of(" \t\r\n") == std::string::npos) throw RequestError{"bad_request", "empty text"};
    return ok(embed_text(input));
  } catch (const RequestError& e) {
    return error(e.kind, e.message);
  } catch (const std::exception& e) {
    return error("internal", e.what());
  }
}

MockSuite make_mock_suite(const MockOntology& ontology, double drift, std::uint64_t rng_seed, const std::string& mount) {
  ontology.validate();
  if (!(drift >= 0.0 && drift <= 1.0)) throw std::invalid_argument("drift must lie in [0,1]");
  const std::string endpoint = "mock:" + mount;
  // Shortest text that parses back to the same double.
  char buf[32];
  const auto end = std::to_chars(buf, buf + sizeof buf, drift).ptr;
  const std::string d(buf, end);
  MockSuite suite;
  suite.captioner = {Role::captioner, "mock-captioner", endpoint, {{"max_caption_length", "50"}}, rng_seed};
  suite.image_generator = {Role::image_generator, "mock-generator", endpoint, {{"drift", d}}, rng_seed};
  suite.labeler_a = {Role::labeler, "mock-objects", endpoint, {{"detector", "objects"}}, rng_seed};
  suite.labeler_b = {Role::labeler, "mock-primary", endpoint, {{"detector", "primary"}}, rng_seed};
  suite.embedder = {Role::embedder, "mock-embedder", endpoint, {}, rng_seed};
  return suite;
}

std::vector<Scene> make_mock_seed_scenes(const MockOntology& ontology, std::size_t count, std::uint64_t rng_seed,
                                         double person_fraction, std::size_t detail_count) {
  ontology.validate();
  const auto concepts = ontology.concepts();
  std::vector<Scene> scenes;
  scenes.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    Rng rng(splitmix64(rng_seed + i));
    const double u_person = rng.uniform();
    const std::string subject = concepts[rng.index(concepts.size())];
    std::vector<std::string> contexts;
    for (const auto& c : concepts) {
      if (ontology.category_of(c) != ontology.category_of(subject)) contexts.push_back(c);
    }
    Scene scene;
    scene.objects = {subject, contexts[rng.index(contexts.size())]};
    if (!ontology.attributes.empty()) scene.attributes = {ontology.attributes[rng.index(ontology.attributes.size())]};
    std::vector<std::string> pool = ontology.details;
    rng.shuffle(pool);
    pool.resize(std::min(detail_count, pool.size()));
    scene.details = pool;
    if (u_person < person_fraction) scene.objects.insert(scene.objects.begin(), "person");
    scenes.push_back(std::move(scene));
  }
  return scenes;
}

std::vector<Scene> make_mock_control_scenes(const MockOntology& ontology, const std::string& subject,
                                            std::size_t count, std::uint64_t rng_seed) {
  ontology.validate();
  const auto subject_category = ontology.category_of(subject);
  if (!subject_category) throw std::invalid_argument("control subject '" + subject + "' is not a concept");
  std::vector<std::string> contexts;
  for (const auto& c : ontology.concepts()) {
    if (ontology.category_of(c) != subject_category) contexts.push_back(c);
  }
  Rng rng(rng_seed);
  rng.shuffle(contexts);
  const std::string attribute = ontology.attributes.empty() ? "" : ontology.attributes[rng.index(ontology.attributes.size())];

  // One shot under different light (another colour) and count/5 close-ups
  // that show extra detail; the rest are plain shots in varying places.
  std::vector<std::size_t> order(count);
  for (std::size_t i = 0; i < count; ++i) order[i] = i;
  rng.shuffle(order);
  std::vector<Scene> scenes(count);
  for (std::size_t i = 0; i < count; ++i) {
    Scene& scene = scenes[i];
    scene.objects = {subject, contexts[i % contexts.size()]};
    if (!attribute.empty()) scene.attributes = {attribute};
  }
  if (count > 1 && ontology.attributes.size() > 1) {
    std::string other = attribute;
    while (other == attribute) other = ontology.attributes[rng.index(ontology.attributes.size())];
    scenes[order[0]].attributes = {other};
  }
  for (std::size_t k = 1; k <= count / kControlCloseUpEvery && k < count; ++k) {
    std::vector<std::string> pool = ontology.details;
    rng.shuffle(pool);
    pool.resize(std::min(kControlCloseUpDetails, pool.size()));
    scenes[order[k]].details = pool;
  }
  return scenes;
}

std::vector<std::string> write_scene_files(const std::vector<Scene>& scenes, const std::filesystem::path& dir) {
  std::vector<std::string> ids;
  for (std::size_t i = 0; i < scenes.size(); ++i) {
    std::ostringstream id;
    id << std::setw(4) << std::setfill('0') << i;
    write_file_atomic(dir / (id.str() + ".scene"), scenes[i].serialize());
    ids.push_back(id.str());
  }
  return ids;
}

}  // namespace fluidity
