#ifndef SEMINFO_CORPUSIO_HPP
#define SEMINFO_CORPUSIO_HPP

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "seminfo/eval.hpp"
#include "seminfo/maxsub.hpp"
#include "seminfo/pcfg.hpp"
#include "seminfo/textnorm.hpp"
#include "seminfo/train.hpp"
#include "seminfo/tree.hpp"

namespace seminfo {

// ---------------------------------------------------------------------------
// Corpus records
// ---------------------------------------------------------------------------

struct CorpusRecord {
  std::string id;
  std::string raw;
  NormalizedSentence normalized;
};

// JSON Lines, one {"id", "text"} object per line. Reading normalizes each
// sentence; writing stores the raw text only. Errors carry path:line context;
// duplicate ids are rejected.
std::vector<CorpusRecord> read_corpus(const std::string& path,
                                      const NormalizationOptions& opts = {});
void write_corpus(const std::string& path,
                  const std::vector<CorpusRecord>& records);

// ---------------------------------------------------------------------------
// Paraphrase files
// ---------------------------------------------------------------------------

// Raw (un-normalized) form of one paraphrase-file line:
//   {"id": str, "source": str, "paraphrases": [str, ...]}
// plus an optional "error" key for sentences the fetch client gave up on.
struct RawParaphraseRecord {
  std::string id;
  std::string source;
  std::vector<std::string> paraphrases;
  std::string error;  // empty = none
};

std::vector<RawParaphraseRecord> read_paraphrase_records(
    const std::string& path);
void write_paraphrase_records(const std::string& path,
                              const std::vector<RawParaphraseRecord>& records);

// Normalized view used by scoring: order preserved, every sentence run
// through textnorm. Throws (with path:line context) on malformed lines,
// duplicate ids, or a source that normalizes to zero tokens.
std::vector<ParaphraseSet> read_paraphrases(
    const std::string& path, const NormalizationOptions& opts = {});

// ---------------------------------------------------------------------------
// Tree files
// ---------------------------------------------------------------------------

struct TreeRecord {
  std::string id;
  ConstituentTree tree;
};

// JSON Lines {"id", "n", "spans": [[i, j], ...]} storing the length >= 2
// spans; single-token spans are reconstructed on read.
std::vector<TreeRecord> read_trees_jsonl(const std::string& path);
void write_trees_jsonl(const std::string& path,
                       const std::vector<TreeRecord>& records);

// Bracketed text, one tree per line: `(LABEL child child)` nodes with
// `(LABEL token)` leaves. A node directly dominating a single token is a
// preterminal and contributes no span (unless it is the whole tree, which
// yields one unary span). Throws with character positions on unbalanced or
// malformed input.
std::vector<GoldTree> read_bracketed(const std::string& path);

// Inverses for the bracket format. Spans must be laminar; tokens.size() must
// equal the tree length. Leaves without a labeled unary span are wrapped as
// (X token).
std::string gold_to_brackets(const GoldTree& gold,
                             const std::vector<std::string>& tokens);
std::string tree_to_brackets(const ConstituentTree& tree,
                             const std::vector<std::string>& tokens);
void write_bracketed(const std::string& path,
                     const std::vector<GoldTree>& golds,
                     const std::vector<std::vector<std::string>>& tokens);

// ---------------------------------------------------------------------------
// Score files
// ---------------------------------------------------------------------------

// JSON Lines {"id", "n", "spans": [[i, j, score], ...]}; doubles round-trip
// bit-exactly.
std::vector<SpanScoreTable> read_scores(const std::string& path);
void write_scores(const std::string& path,
                  const std::vector<SpanScoreTable>& tables);

// ---------------------------------------------------------------------------
// Checkpoints
// ---------------------------------------------------------------------------

// Versioned JSON snapshot of everything training needs to resume bit-exactly:
// grammar (vocab + flat logits), optimizer moments, running-baseline sums,
// step counter, and the sampler RNG state (stream form; empty = fresh).
struct Checkpoint {
  std::int64_t step = 0;
  Grammar grammar;
  AdamState adam;
  double reward_sum = 0;
  std::int64_t reward_count = 0;
  std::string rng_state;
};

void write_checkpoint(const std::string& path, const Checkpoint& c);
Checkpoint read_checkpoint(const std::string& path);

// ---------------------------------------------------------------------------
// Config files
// ---------------------------------------------------------------------------

// Plain-text `key = value` lines mirroring TrainingConfig field names
// (policy, samples_per_sentence, entropy_coef, entropy_placement, ll_weight,
// learning_rate, batch_size, max_steps, seed, clip_norm). '#' starts a
// comment. Unknown keys or unparsable values throw with line numbers.
TrainingConfig parse_config_text(const std::string& text,
                                 const TrainingConfig& base = {});
TrainingConfig read_training_config(const std::string& path,
                                    const TrainingConfig& base = {});

// ---------------------------------------------------------------------------
// Prompt templates and the paraphrase-service client
// ---------------------------------------------------------------------------

struct PromptTemplate {
  std::string name;
  std::string text;  // contains a {lang} placeholder
};

// The bundled paraphrasing prompts (nine; configurations typically select
// eight). Every template asks for meaning-preserving rewrites, one per line.
const std::vector<PromptTemplate>& default_prompt_templates();

// Replaces every {lang} placeholder.
std::string render_template(const PromptTemplate& t, const std::string& lang);

struct FetchConfig {
  std::string endpoint;  // e.g. "http://127.0.0.1:8089"
  std::string path = "/v1/chat/completions";
  std::string model = "paraphraser";
  std::string lang = "English";
  int samples_per_prompt = 1;
  int max_retries = 3;
  int backoff_initial_ms = 250;  // doubles after every failed attempt
  int timeout_s = 30;
  int concurrency = 1;  // request pipelining bound (sequential when 1)
  std::vector<PromptTemplate> templates;  // empty: first 8 defaults
};

struct FetchOutcome {
  std::size_t completed = 0;  // sentences fetched and written this run
  std::size_t skipped = 0;    // already present in the progress journal
  std::size_t failed = 0;     // per-sentence error records written
  bool aborted = false;       // hard failure; rerun resumes from the journal
};

// Queries an HTTP JSON chat-completion endpoint once per sentence x template,
// splits completion lines into candidate paraphrases, and appends one JSON
// Lines record per sentence to out_path. The Authorization bearer token is
// read from the SEMINFO_API_KEY environment variable when present. Completed
// sentence ids are journaled to progress_path after each write, so an
// interrupted or aborted run resumes where it stopped. Transport errors and
// 5xx/429 responses retry with exponential backoff and then degrade to a
// per-sentence error record; 402 aborts the run cleanly (hard quota).
FetchOutcome fetch_paraphrases(const FetchConfig& cfg,
                               const std::vector<CorpusRecord>& sentences,
                               const std::string& out_path,
                               const std::string& progress_path);

// ---------------------------------------------------------------------------
// Synthetic corpus generator
// ---------------------------------------------------------------------------

struct SynthConfig {
  int corpus_size = 500;
  std::uint32_t min_len = 5;
  std::uint32_t max_len = 12;
  int paraphrases_per_sentence = 16;  // N
  double swap_prob = 0.35;   // per binary node: exchange the two children
  double front_prob = 0.0;   // per paraphrase: front one non-root constituent
  bool identity_only = false;  // every paraphrase equals its source
  int max_rejections = 200000;
};

struct SynthOutput {
  Grammar gold_grammar;  // the generating distribution, normalized
  std::vector<CorpusRecord> corpus;
  std::vector<GoldTree> gold;  // over normalized token positions
  std::vector<RawParaphraseRecord> paraphrases;
};

// Samples corpus_size sentences with gold derivations from a fixed hand
// written CNF grammar (8 nonterminals, 33 terminals), rejecting lengths
// outside [min_len, max_len], then emits N paraphrases per sentence by
// moving whole gold constituents: recursive sibling swaps and optional
// fronting. Moved constituents stay contiguous, so span scores favour the
// gold bracketing. Deterministic given the rng state; throws when the
// length window rejects max_rejections derivations in a row.
SynthOutput synth_corpus(const SynthConfig& cfg, std::mt19937_64& rng);

// ---------------------------------------------------------------------------
// Training-run driver
// ---------------------------------------------------------------------------

struct TrainRunConfig {
  TrainingConfig opt;
  int checkpoint_interval = 0;  // 0: initial and final checkpoints only
  int eval_interval = 0;        // 0: never; else corpus F1 every k steps
  bool shuffle = true;          // per-epoch order from a step-indexed rng
  std::string out_dir;          // created if missing
};

struct TrainRunResult {
  Grammar final_grammar;
  std::vector<CheckpointEntry> checkpoints;  // in-memory (step, grammar)
  std::vector<std::string> checkpoint_paths;
  std::string metrics_path;
  std::vector<StepStats> stats;  // one per executed step
};

// Runs opt.max_steps REINFORCE batches over the examples, writing
// checkpoint_XXXXXX.json files and a metrics.jsonl log (one record per step;
// corpus F1 added on eval steps when gold is non-null, aligned with the
// examples). The batch order for step s depends only on (seed, s), so a run
// resumed from a checkpoint continues exactly as the uninterrupted run. A
// fixed (seed, config, data) triple yields byte-identical logs and
// checkpoints.
TrainRunResult run_training(const Grammar& init,
                            const std::vector<TrainExample>& examples,
                            const std::vector<GoldTree>* gold,
                            const TrainRunConfig& cfg,
                            const Checkpoint* resume = nullptr);

}  // namespace seminfo

#endif  // SEMINFO_CORPUSIO_HPP
