#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "fluidity/backend.hpp"

namespace fluidity {

inline constexpr std::string_view kSceneMediaType = "text/x-scene";

/// Symbolic stand-in for an image: ordered objects (subject first),
/// attributes of the subject and free descriptive details. Serialized as
///   scene v1
///   object <name>
///   attr <name>
///   detail <word>
/// Details are words a captioner can see but a generator does not
/// reproduce, the way a photograph carries more than its caption.
struct Scene {
  std::vector<std::string> objects;
  std::vector<std::string> attributes;
  std::vector<std::string> details;

  std::string serialize() const;
  /// Throws std::invalid_argument on malformed text.
  static Scene parse(std::string_view text);
  Image to_image() const { return {std::string(kSceneMediaType), serialize()}; }

  friend bool operator==(const Scene&, const Scene&) = default;
};

struct MockOntology {
  /// category -> concepts, in a fixed order that also fixes embedding axes.
  std::vector<std::pair<std::string, std::vector<std::string>>> categories;
  /// concept -> drift candidates.
  std::map<std::string, std::vector<std::string>> adjacency;
  std::vector<std::string> attributes;
  /// Descriptive words for seed scenes; never concepts or attributes.
  std::vector<std::string> details;

  static MockOntology default_ontology();

  /// Throws std::invalid_argument unless every concept sits in exactly one
  /// category, adjacency is closed over the concept set and attribute and
  /// detail words are disjoint from the concepts.
  void validate() const;

  std::vector<std::string> concepts() const;
  std::optional<std::size_t> category_of(std::string_view concept_name) const;
  std::optional<std::size_t> concept_index(std::string_view concept_name) const;
  std::optional<std::size_t> attribute_index(std::string_view attribute) const;
  /// Maps a caption token ("trucks") to its concept ("truck").
  std::optional<std::string> match_concept(std::string_view token) const;
};

/// Weights of the mock embedding space.
struct MockGeometry {
  double concept_decay = 0.5;         // weight ratio between successive concepts of a text
  double attribute_weight = 0.7;
  double unknown_weight = 0.7;        // words outside the ontology, hashed into buckets
  double image_text_alignment = 0.8;  // cosine between a scene and its exact caption
};

/// In-process implementation of the wire protocol over a MockOntology.
/// Every answer is a pure function of the request, so concurrent chains
/// cannot perturb each other. Counts calls per route.
///
/// Text embeddings put concept c at sqrt(0.6)*e_category + sqrt(0.4)*e_concept,
/// so two distinct concepts have cosine 0.6 within a category and 0 across.
/// Later concepts in a text are down-weighted (subject dominates), attributes
/// and unknown words get their own axes. Image embeddings blend the scene's
/// semantic vector with a per-image "pixel" block orthogonal to all text.
class MockService final : public Transport {
 public:
  explicit MockService(MockOntology ontology = MockOntology::default_ontology(), MockGeometry geometry = {});

  nlohmann::json post(std::string_view route, const nlohmann::json& request) override;

  std::uint64_t calls() const { return total_calls_.load(); }
  std::uint64_t calls(std::string_view route) const;
  void reset_counts();
  /// Drift used when a /generate request carries no "drift" param.
  void set_default_drift(double drift);
  /// Mixed into every request seed; 0 leaves seeds untouched.
  void set_seed_salt(std::uint64_t salt) { seed_salt_ = salt; }

  const MockOntology& ontology() const { return ontology_; }
  std::size_t embedding_dim() const;

  std::string caption_for(const Scene& scene, std::size_t max_words) const;
  Scene generate(std::string_view prompt, double drift, double attribute_drift, std::uint64_t seed) const;
  std::vector<std::string> labels_for(const Scene& scene, std::string_view detector) const;
  std::vector<double> embed_text(std::string_view text) const;
  std::vector<double> embed_image(const Image& image) const;
  Scene parse_prompt(std::string_view prompt) const;

 private:
  std::vector<double> semantic_vector(const std::vector<std::string>& concepts_in_order,
                                      const std::vector<std::string>& attributes,
                                      const std::vector<std::string>& other_tokens) const;

  MockOntology ontology_;
  MockGeometry geometry_;
  std::size_t category_offset_ = 0;
  std::size_t concept_offset_ = 0;
  std::size_t attribute_offset_ = 0;
  std::size_t unknown_offset_ = 0;
  std::size_t null_offset_ = 0;
  std::size_t pixel_offset_ = 0;
  std::size_t dim_ = 0;

  std::atomic<double> default_drift_{0.0};
  std::atomic<std::uint64_t> seed_salt_{0};
  std::atomic<std::uint64_t> total_calls_{0};
  std::atomic<std::uint64_t> caption_calls_{0};
  std::atomic<std::uint64_t> generate_calls_{0};
  std::atomic<std::uint64_t> labels_calls_{0};
  std::atomic<std::uint64_t> embed_calls_{0};
};

struct MockSuite {
  BackendDescriptor captioner;
  BackendDescriptor image_generator;
  BackendDescriptor labeler_a;  // every object in the scene
  BackendDescriptor labeler_b;  // the dominant object only
  BackendDescriptor embedder;

  std::vector<BackendDescriptor> all() const { return {captioner, image_generator, labeler_a, labeler_b, embedder}; }
};

/// Descriptors for the mock roles, all pointing at "mock:<mount>". `drift` is
/// the per-step probability that the generator swaps the subject concept.
/// The generator also honours an "attribute_drift" param (default 0), the
/// per-step probability of recolouring the subject.
/// Throws std::invalid_argument for drift outside [0,1] or a bad ontology.
MockSuite make_mock_suite(const MockOntology& ontology, double drift, std::uint64_t rng_seed,
                          const std::string& mount = "suite");

/// Seed scenes for desk-scale runs: a subject, a context object from another
/// category, one attribute and `detail_count` details. `person_fraction` of
/// them lead with a "person" object so that seed filtering has something to
/// reject.
std::vector<Scene> make_mock_seed_scenes(const MockOntology& ontology, std::size_t count, std::uint64_t rng_seed,
                                         double person_fraction = 0.0, std::size_t detail_count = 3);

/// Near-identical scenes of one subject for control chains: the context
/// varies, the attribute mostly stays, and a few details come and go.
std::vector<Scene> make_mock_control_scenes(const MockOntology& ontology, const std::string& subject,
                                            std::size_t count, std::uint64_t rng_seed);

/// Writes scenes as <dir>/<id>.scene with zero-padded ids; returns the ids.
std::vector<std::string> write_scene_files(const std::vector<Scene>& scenes, const std::filesystem::path& dir);

}  // namespace fluidity
