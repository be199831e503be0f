#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "seminfo/corpusio.hpp"
#include "seminfo/parse.hpp"

namespace seminfo {
namespace {

using nlohmann::json;

std::string rng_to_string(const std::mt19937_64& rng) {
  std::ostringstream out;
  out << rng;
  return out.str();
}

std::mt19937_64 rng_from_string(const std::string& state, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  if (!state.empty()) {
    std::istringstream in(state);
    in >> rng;
    if (!in)
      throw std::runtime_error("run_training: malformed checkpoint rng state");
  }
  return rng;
}

// Epoch order derived only from (seed, epoch), so any step can be replayed.
std::vector<std::size_t> epoch_order(std::size_t n, std::uint64_t seed,
                                     std::int64_t epoch, bool shuffle) {
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  if (!shuffle) return order;
  std::mt19937_64 rng(seed +
                      0x9e3779b97f4a7c15ULL * static_cast<std::uint64_t>(epoch + 1));
  for (std::size_t i = n; i > 1; --i)
    std::swap(order[i - 1], order[rng() % i]);
  return order;
}

std::optional<double> dev_corpus_f1(const Grammar& g,
                                    const std::vector<TrainExample>& examples,
                                    const std::vector<GoldTree>& gold) {
  std::vector<std::optional<double>> per;
  for (std::size_t i = 0; i < examples.size(); ++i) {
    const ConstituentTree t = parse_mbr(g, examples[i].first);
    const std::vector<bool> keep(examples[i].first.size(), true);
    per.push_back(sentence_f1(t, gold[i], keep));
  }
  for (const auto& v : per)
    if (v.has_value()) return corpus_f1(per);
  return std::nullopt;  // every sentence skipped by the F1 protocol
}

}  // namespace

TrainRunResult run_training(const Grammar& init,
                            const std::vector<TrainExample>& examples,
                            const std::vector<GoldTree>* gold,
                            const TrainRunConfig& cfg,
                            const Checkpoint* resume) {
  validate_config(cfg.opt);
  if (examples.empty())
    throw std::invalid_argument("run_training: empty corpus");
  if (gold && gold->size() != examples.size())
    throw std::invalid_argument("run_training: gold/corpus sizes disagree");
  if (cfg.out_dir.empty())
    throw std::invalid_argument("run_training: out_dir required");
  if (cfg.checkpoint_interval < 0 || cfg.eval_interval < 0)
    throw std::invalid_argument("run_training: negative interval");
  std::filesystem::create_directories(cfg.out_dir);

  Grammar g = init;
  TrainerState state;
  std::mt19937_64 rng(cfg.opt.seed);
  std::int64_t start_step = 0;
  if (resume) {
    if (resume->step > cfg.opt.max_steps)
      throw std::invalid_argument("run_training: checkpoint beyond max_steps");
    g = resume->grammar;
    state.adam = resume->adam;
    state.reward_sum = resume->reward_sum;
    state.reward_count = resume->reward_count;
    rng = rng_from_string(resume->rng_state, cfg.opt.seed);
    start_step = resume->step;
  }

  TrainRunResult result;
  result.metrics_path = cfg.out_dir + "/metrics.jsonl";
  std::ofstream metrics(result.metrics_path,
                        std::ios::binary |
                            (resume ? std::ios::app : std::ios::trunc));
  if (!metrics)
    throw std::runtime_error("cannot open " + result.metrics_path +
                             " for writing");

  auto save = [&](std::int64_t step) {
    Checkpoint c;
    c.step = step;
    c.grammar = g;
    c.adam = state.adam.m_binary.empty() ? make_adam_state(g) : state.adam;
    c.reward_sum = state.reward_sum;
    c.reward_count = state.reward_count;
    c.rng_state = rng_to_string(rng);
    char name[32];
    std::snprintf(name, sizeof name, "/checkpoint_%06lld.json",
                  static_cast<long long>(step));
    const std::string path = cfg.out_dir + name;
    write_checkpoint(path, c);
    result.checkpoints.push_back({step, g});
    result.checkpoint_paths.push_back(path);
  };
  save(start_step);

  const std::size_t n = examples.size();
  const std::int64_t batch_size = cfg.opt.batch_size;
  const std::int64_t batches_per_epoch =
      (static_cast<std::int64_t>(n) + batch_size - 1) / batch_size;
  for (std::int64_t s = start_step + 1; s <= cfg.opt.max_steps; ++s) {
    const std::int64_t epoch = (s - 1) / batches_per_epoch;
    const std::int64_t slot = (s - 1) % batches_per_epoch;
    const std::vector<std::size_t> order =
        epoch_order(n, cfg.opt.seed, epoch, cfg.shuffle);
    std::vector<TrainExample> batch;
    for (std::int64_t k = slot * batch_size;
         k < std::min<std::int64_t>((slot + 1) * batch_size,
                                    static_cast<std::int64_t>(n));
         ++k)
      batch.push_back(examples[order[static_cast<std::size_t>(k)]]);

    StepStats stats;
    std::tie(g, stats) = training_step(g, batch, cfg.opt, rng, state);

    json rec = {{"step", s},
                {"mean_log_z", stats.mean_log_z},
                {"mean_reward", stats.mean_reward},
                {"baseline", stats.baseline},
                {"entropy", stats.entropy},
                {"grad_norm", stats.grad_norm}};
    if (gold && cfg.eval_interval > 0 &&
        (s % cfg.eval_interval == 0 || s == cfg.opt.max_steps)) {
      const auto f1 = dev_corpus_f1(g, examples, *gold);
      rec["corpus_f1"] = f1.has_value() ? json(*f1) : json(nullptr);
    }
    metrics << rec.dump() << '\n';
    metrics.flush();
    if (!metrics)
      throw std::runtime_error("write to " + result.metrics_path + " failed");
    stats.step = s;
    result.stats.push_back(stats);

    if ((cfg.checkpoint_interval > 0 && s % cfg.checkpoint_interval == 0) ||
        s == cfg.opt.max_steps)
      if (result.checkpoints.back().step != s) save(s);
  }
  result.final_grammar = g;
  return result;
}

}  // namespace seminfo
