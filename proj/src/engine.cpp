#include "fluidity/engine.hpp"

#include <algorithm>
#include <chrono>
#include <exception>
#include <iomanip>
#include <numeric>
#include <set>
#include <sstream>

#include "fluidity/metrics.hpp"
#include "fluidity/rng.hpp"
#include "fluidity/stats.hpp"

namespace fluidity {

namespace {

bool blank(std::string_view text) { return text.find_first_not_of(" \t\r\n") == std::string_view::npos; }

void require(const BackendDescriptor& d, Role role, const std::string& what) {
  if (d.role != role) throw std::invalid_argument(what + " must have role " + std::string(to_string(role)));
  if (d.backend_id.empty()) throw std::invalid_argument(what + " needs a backend_id");
  if (d.endpoint.empty()) throw std::invalid_argument(what + " needs an endpoint");
}

std::string lowercase(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

bool is_image_file(const std::filesystem::path& p) {
  const std::string ext = lowercase(p.extension().string());
  return ext == ".png" || ext == ".jpg" || ext == ".jpeg" || ext == ".scene";
}

StepMetrics score_step(const Caption& seed_caption, const LabelSet& seed_a, const LabelSet& seed_b,
                       const Caption& caption, const LabelSet& labels_a, const LabelSet& labels_b,
                       const Embedding& image_embedding, const SimilarityContext& ctx) {
  StepMetrics m;
  m.compat_score = compat_score(image_embedding, ctx.embed(seed_caption.text));
  m.detector_a_sim = label_sim(seed_a, labels_a, ctx);
  m.detector_b_sim = label_sim(seed_b, labels_b, ctx);
  const CaptionPairScores pair = caption_pair_scores(seed_caption, caption, ctx);
  m.label_semantic_score = pair.label_semantic;
  m.caption_semantic_score = pair.caption_semantic;
  m.caption_labels_missing = pair.labels_missing;
  return m;
}

void finish(ChainRecord& record, int max_steps) {
  record.complete = true;
  const auto flags = record.flags();
  record.chain_length = chain_length(flags, max_steps);
}

}  // namespace

std::vector<BackendDescriptor> ExperimentConfig::backends() const {
  return {image_generator, captioner, labelers[0], labelers[1], embedder};
}

void ExperimentConfig::validate() const {
  require(image_generator, Role::image_generator, "image generator");
  require(captioner, Role::captioner, "captioner");
  require(labelers[0], Role::labeler, "first labeler");
  require(labelers[1], Role::labeler, "second labeler");
  require(embedder, Role::embedder, "embedder");
  thresholds.validate();
  if (max_steps < 1 || max_steps > kMaxChainSteps) {
    throw std::invalid_argument("max_steps must lie in 1.." + std::to_string(kMaxChainSteps));
  }
  if (workers < 1) throw std::invalid_argument("workers must be at least 1");
  std::set<std::string> ids;
  for (const auto& s : seed_set) {
    if (s.id.empty()) throw std::invalid_argument("seed with an empty id");
    if (!ids.insert(s.id).second) throw std::invalid_argument("duplicate seed id " + s.id);
  }
}

Image load_image(const std::filesystem::path& path) {
  Image image;
  const std::string ext = lowercase(path.extension().string());
  if (ext == ".scene") {
    image.media_type = "text/x-scene";
  } else if (ext == ".jpg" || ext == ".jpeg") {
    image.media_type = "image/jpeg";
  } else {
    image.media_type = "image/png";
  }
  image.bytes = read_file(path);
  if (image.bytes.empty()) throw std::runtime_error("image file is empty: " + path.string());
  return image;
}

InsufficientSeeds::InsufficientSeeds(std::size_t found, std::size_t wanted)
    : std::runtime_error("only " + std::to_string(found) + " of the requested " + std::to_string(wanted) +
                         " candidate images qualify as seeds"),
      found_(found) {}

bool is_face_class(std::string_view label) {
  static const std::set<std::string, std::less<>> kFaceClass = {"person", "face", "people", "man",  "woman",
                                                                "boy",    "girl", "child",  "human", "head"};
  return kFaceClass.contains(lowercase(label));
}

std::vector<SeedImage> ingest_seed_dataset(const std::filesystem::path& source_dir, std::size_t target_count,
                                           const BackendDescriptor& labeler, const BackendClient& client,
                                           std::uint64_t rng_seed) {
  if (target_count == 0) return {};
  std::vector<std::filesystem::path> candidates;
  if (std::filesystem::is_directory(source_dir)) {
    for (const auto& entry : std::filesystem::directory_iterator(source_dir)) {
      if (entry.is_regular_file() && is_image_file(entry.path())) candidates.push_back(entry.path());
    }
  }
  if (candidates.empty()) throw std::runtime_error("no candidates in " + source_dir.string());
  std::sort(candidates.begin(), candidates.end());
  Rng rng(rng_seed);
  rng.shuffle(candidates);

  std::vector<SeedImage> seeds;
  for (const auto& path : candidates) {
    if (seeds.size() == target_count) break;
    const std::string id = path.stem().string();
    const LabelSet labels = client.request_labels(load_image(path), labeler, stream_seed(rng_seed, id, 0));
    if (labels.labels.empty() || is_face_class(labels.labels.front())) continue;
    const std::size_t window = std::min<std::size_t>(3, labels.labels.size());
    if (std::any_of(labels.labels.begin(), labels.labels.begin() + static_cast<std::ptrdiff_t>(window),
                    [](const std::string& l) { return is_face_class(l); })) {
      continue;
    }
    seeds.push_back({id, path, labels.labels.front()});
  }
  if (seeds.size() < target_count) throw InsufficientSeeds(seeds.size(), target_count);
  std::sort(seeds.begin(), seeds.end(), [](const SeedImage& a, const SeedImage& b) { return a.id < b.id; });
  return seeds;
}

ChainRecord run_chain(const SeedImage& seed, const ExperimentConfig& config, const BackendClient& client,
                      const RunDirectory* run_dir, const ChainRecord* resume_from) {
  ChainRecord record;
  if (resume_from != nullptr && !resume_from->complete && resume_from->seed == seed &&
      !blank(resume_from->seed_caption.text)) {
    record = *resume_from;
  } else {
    record.seed = seed;
  }
  record.combo = config.combo();
  record.thresholds = config.thresholds;
  record.rng_seed = config.rng_seed;
  record.complete = false;
  record.chain_length = 0;

  auto seed_for = [&](int step) { return stream_seed(config.rng_seed, seed.id, static_cast<std::uint64_t>(step)); };
  int step = static_cast<int>(record.steps.size());
  try {
    if (record.steps.empty()) {
      const Image seed_image = load_image(seed.path);
      record.seed_caption = client.request_caption(seed_image, config.captioner, seed_for(0), 0);
      if (blank(record.seed_caption.text)) throw ChainError(0, "captioner returned empty text for the seed", record);
      record.seed_labels_a = client.request_labels(seed_image, config.labelers[0], seed_for(0));
      record.seed_labels_b = client.request_labels(seed_image, config.labelers[1], seed_for(0));
    }
    const SimilarityContext ctx(client, config.embedder, config.thresholds);
    Caption previous = record.steps.empty() ? record.seed_caption : record.steps.back().caption;
    for (step = static_cast<int>(record.steps.size()) + 1; step <= config.max_steps; ++step) {
      ChainStep s;
      s.index = step;
      const Image image = client.request_image(previous, config.image_generator, seed_for(step));
      if (run_dir != nullptr) s.image_path = run_dir->save_image(seed.id, step, image.extension(), image.bytes);
      s.caption = client.request_caption(image, config.captioner, seed_for(step), step);
      if (blank(s.caption.text)) {
        throw ChainError(step, "captioner returned empty text at step " + std::to_string(step), record);
      }
      s.labels_a = client.request_labels(image, config.labelers[0], seed_for(step));
      s.labels_b = client.request_labels(image, config.labelers[1], seed_for(step));
      const Embedding image_embedding = client.embed_image(image, config.embedder);
      s.metrics = score_step(record.seed_caption, record.seed_labels_a, record.seed_labels_b, s.caption, s.labels_a,
                             s.labels_b, image_embedding, ctx);
      s.flags = evaluate_step(s.metrics, config.thresholds);
      previous = s.caption;
      record.steps.push_back(std::move(s));
    }
  } catch (const ChainError&) {
    throw;
  } catch (const std::exception& e) {
    throw ChainError(step, "chain " + seed.id + " failed at step " + std::to_string(step) + ": " + e.what(), record);
  }
  finish(record, config.max_steps);
  return record;
}

std::vector<int> load_lengths(const RunDirectory& run_dir) {
  std::vector<int> lengths;
  for (const auto& r : run_dir.load_chains()) {
    if (r.complete) lengths.push_back(r.chain_length);
  }
  return lengths;
}

LengthDistribution load_distribution(const RunDirectory& run_dir) {
  Combo combo;
  if (run_dir.has_manifest()) combo = run_dir.load_manifest().combo;
  return histogram(load_lengths(run_dir), combo);
}

ExperimentResult run_experiment(const ExperimentConfig& config, const std::filesystem::path& run_dir,
                                const BackendClient& client, const ExperimentOptions& options) {
  config.validate();
  const RunDirectory dir(run_dir);
  RunManifest manifest;
  if (dir.has_manifest()) {
    manifest = dir.load_manifest();
    if (manifest.combo != config.combo() || manifest.seed_set_id != config.seed_set_id ||
        manifest.rng_seed != config.rng_seed || manifest.thresholds != config.thresholds) {
      throw std::runtime_error("run directory " + run_dir.string() + " holds a different experiment");
    }
  } else {
    manifest.run_id = config.run_id;
    manifest.combo = config.combo();
    manifest.seed_set_id = config.seed_set_id;
    manifest.thresholds = config.thresholds;
    manifest.rng_seed = config.rng_seed;
    manifest.backends = config.backends();
    dir.save_manifest(manifest);
  }

  std::vector<const SeedImage*> pending;
  for (const auto& s : config.seed_set) {
    if (!manifest.completed_chain_ids.contains(s.id)) pending.push_back(&s);
  }
  if (options.stop_after && pending.size() > *options.stop_after) pending.resize(*options.stop_after);
  std::erase_if(manifest.failed_chains, [&](const FailedChain& f) {
    return std::any_of(pending.begin(), pending.end(), [&](const SeedImage* s) { return s->id == f.seed_id; });
  });

  std::exception_ptr fatal;
  auto run_one = [&](std::size_t i) {
    const SeedImage& seed = *pending[i];
    const auto started = std::chrono::steady_clock::now();
    std::optional<ChainRecord> partial;
    std::string line;
    try {
      partial = dir.load_chain(seed.id);
    } catch (const std::exception&) {
      partial.reset();  // unreadable leftovers are simply rerun
    }
    try {
      const ChainRecord record = run_chain(seed, config, client, &dir, partial ? &*partial : nullptr);
      dir.save_chain(record);
      const auto ms =
          std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - started).count();
      line = "chain " + seed.id + " length " + std::to_string(record.chain_length) + " " + std::to_string(ms) + " ms";
#pragma omp critical(fluidity_manifest)
      {
        manifest.completed_chain_ids.insert(seed.id);
        dir.save_manifest(manifest);
        if (options.log) options.log(line);
      }
    } catch (const ChainError& e) {
      dir.save_chain(e.partial());
      line = "chain " + seed.id + " failed at step " + std::to_string(e.step()) + ": " + e.what();
#pragma omp critical(fluidity_manifest)
      {
        manifest.failed_chains.push_back({seed.id, e.step(), e.what()});
        dir.save_manifest(manifest);
        if (options.log) options.log(line);
      }
    }
  };

  if (options.execution == Execution::serial) {
    for (std::size_t i = 0; i < pending.size(); ++i) run_one(i);
  } else {
    const long n = static_cast<long>(pending.size());
#pragma omp parallel for schedule(dynamic) num_threads(config.workers)
    for (long i = 0; i < n; ++i) {
      try {
        run_one(static_cast<std::size_t>(i));
      } catch (...) {
#pragma omp critical(fluidity_fatal)
        if (!fatal) fatal = std::current_exception();
      }
    }
    if (fatal) std::rethrow_exception(fatal);
  }

  std::sort(manifest.failed_chains.begin(), manifest.failed_chains.end(),
            [](const FailedChain& a, const FailedChain& b) { return a.seed_id < b.seed_id; });
  dir.save_manifest(manifest);

  ExperimentResult result;
  result.manifest = manifest;
  result.executed = pending.size();
  std::vector<int> lengths;
  for (const auto& id : manifest.completed_chain_ids) {
    if (auto r = dir.load_chain(id); r && r->complete) lengths.push_back(r->chain_length);
  }
  result.distribution = histogram(lengths, manifest.combo);
  return result;
}

std::vector<ChainRecord> build_control_chains(const std::vector<std::filesystem::path>& category_images,
                                              const std::string& category, int shuffles,
                                              const ExperimentConfig& config, const BackendClient& client,
                                              Execution execution) {
  if (category_images.size() != static_cast<std::size_t>(kMaxChainSteps)) {
    throw std::invalid_argument("control chains need exactly " + std::to_string(kMaxChainSteps) + " images, got " +
                                std::to_string(category_images.size()));
  }
  if (shuffles < 0) throw std::invalid_argument("shuffle count must not be negative");
  if (config.max_steps != kMaxChainSteps) throw std::invalid_argument("control chains always span 15 images");
  require(config.captioner, Role::captioner, "captioner");
  require(config.labelers[0], Role::labeler, "first labeler");
  require(config.labelers[1], Role::labeler, "second labeler");
  require(config.embedder, Role::embedder, "embedder");
  config.thresholds.validate();

  // Each image is captioned, labeled and embedded once; shuffles only reorder them.
  struct Prepared {
    std::string path;
    Caption caption;
    LabelSet labels_a;
    LabelSet labels_b;
    Embedding embedding;
  };
  std::vector<Prepared> prepared;
  for (const auto& path : category_images) {
    const Image image = load_image(path);
    const std::uint64_t seed = stream_seed(config.rng_seed, path.filename().string(), 0);
    Prepared p;
    p.path = path.string();
    p.caption = client.request_caption(image, config.captioner, seed, 0);
    if (blank(p.caption.text)) throw std::runtime_error("captioner returned empty text for " + path.string());
    p.labels_a = client.request_labels(image, config.labelers[0], seed);
    p.labels_b = client.request_labels(image, config.labelers[1], seed);
    p.embedding = client.embed_image(image, config.embedder);
    prepared.push_back(std::move(p));
  }

  std::vector<ChainRecord> records(static_cast<std::size_t>(shuffles));
  auto build = [&](int s) {
    std::vector<std::size_t> order(prepared.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(stream_seed(config.rng_seed, category, static_cast<std::uint64_t>(s)));
    rng.shuffle(order);

    const Prepared& anchor = prepared[order.front()];
    std::ostringstream id;
    id << category << '-' << std::setw(4) << std::setfill('0') << s;
    ChainRecord r;
    r.seed = {id.str(), anchor.path, category};
    r.seed_caption = anchor.caption;
    r.seed_labels_a = anchor.labels_a;
    r.seed_labels_b = anchor.labels_b;
    r.combo = {std::string(kControlGeneratorId), config.captioner.backend_id};
    r.thresholds = config.thresholds;
    r.rng_seed = config.rng_seed;
    const SimilarityContext ctx(client, config.embedder, config.thresholds);
    for (std::size_t x = 0; x < order.size(); ++x) {
      const Prepared& p = prepared[order[x]];
      ChainStep step;
      step.index = static_cast<int>(x) + 1;
      step.image_path = p.path;
      step.caption = p.caption;
      step.caption.step_index = step.index;
      step.labels_a = p.labels_a;
      step.labels_b = p.labels_b;
      step.metrics = score_step(r.seed_caption, r.seed_labels_a, r.seed_labels_b, step.caption, step.labels_a,
                                step.labels_b, p.embedding, ctx);
      step.flags = evaluate_step(step.metrics, config.thresholds);
      r.steps.push_back(std::move(step));
    }
    finish(r, kMaxChainSteps);
    records[static_cast<std::size_t>(s)] = std::move(r);
  };

  if (execution == Execution::serial) {
    for (int s = 0; s < shuffles; ++s) build(s);
  } else {
    std::exception_ptr fatal;
#pragma omp parallel for schedule(dynamic) num_threads(config.workers)
    for (int s = 0; s < shuffles; ++s) {
      try {
        build(s);
      } catch (...) {
#pragma omp critical(fluidity_fatal)
        if (!fatal) fatal = std::current_exception();
      }
    }
    if (fatal) std::rethrow_exception(fatal);
  }
  return records;
}

}  // namespace fluidity
