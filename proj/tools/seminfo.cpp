// seminfo: command-line frontend for the unsupervised parsing toolkit.
//
//   synth       write a seeded synthetic corpus with gold trees + paraphrases
//   paraphrase  fetch paraphrases from an HTTP chat-completion endpoint
//   score       turn paraphrase files into span score tables
//   train       run the REINFORCE trainer, writing checkpoints + metrics
//   parse       decode trees with a checkpoint, score table, or baseline
//   eval        score predicted trees against gold brackets
//   correlate   study F1 vs. SemInfo / log-likelihood across checkpoints

#include <CLI11.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "seminfo/corpusio.hpp"
#include "seminfo/eval.hpp"
#include "seminfo/parse.hpp"

using namespace seminfo;
using nlohmann::json;

namespace {

std::vector<std::string> split_ws(const std::string& s) {
  std::istringstream in(s);
  std::vector<std::string> out;
  std::string w;
  while (in >> w) out.push_back(w);
  return out;
}

std::map<std::string, SpanScoreTable> scores_by_id(const std::string& path) {
  std::map<std::string, SpanScoreTable> out;
  for (SpanScoreTable& t : read_scores(path)) {
    const std::string id = t.id;
    if (!out.emplace(id, std::move(t)).second)
      throw std::runtime_error(path + ": duplicate score id '" + id + "'");
  }
  return out;
}

const SpanScoreTable& score_for(const std::map<std::string, SpanScoreTable>& m,
                                const CorpusRecord& rec) {
  const auto it = m.find(rec.id);
  if (it == m.end())
    throw std::runtime_error("no score table for sentence '" + rec.id + "'");
  if (it->second.n != rec.normalized.normalized_tokens.size())
    throw std::runtime_error("score table for '" + rec.id +
                             "' disagrees with the sentence length");
  return it->second;
}

// Projects gold spans (over original tokens) onto the kept coordinates the
// trainer and correlation study operate in; empty images are dropped.
GoldTree remap_gold(const GoldTree& gold, const std::vector<bool>& keep,
                    const std::string& id) {
  if (gold.n != keep.size())
    throw std::runtime_error("gold tree for '" + id + "' has " +
                             std::to_string(gold.n) + " tokens, sentence has " +
                             std::to_string(keep.size()));
  std::vector<std::uint32_t> pre(keep.size() + 1, 0);
  for (std::size_t k = 0; k < keep.size(); ++k)
    pre[k + 1] = pre[k] + (keep[k] ? 1u : 0u);
  GoldTree out;
  out.n = pre.back();
  for (const LabeledSpan& ls : gold.labeled_spans) {
    const std::uint32_t i = pre[ls.span.i], j = pre[ls.span.j];
    if (j > i) out.labeled_spans.insert({{i, j}, ls.label});
  }
  return out;
}

std::vector<GoldTree> load_gold_for(const std::string& path,
                                    const std::vector<CorpusRecord>& corpus) {
  const std::vector<GoldTree> gold = read_bracketed(path);
  if (gold.size() != corpus.size())
    throw std::runtime_error(path + ": " + std::to_string(gold.size()) +
                             " trees for " + std::to_string(corpus.size()) +
                             " sentences");
  return gold;
}

Grammar grammar_for_corpus(const std::vector<CorpusRecord>& corpus, int nts,
                           double init_scale, std::uint64_t seed) {
  std::set<std::string> vocab;
  for (const CorpusRecord& rec : corpus)
    vocab.insert(rec.normalized.normalized_tokens.begin(),
                 rec.normalized.normalized_tokens.end());
  return random_grammar(
      nts, std::vector<std::string>(vocab.begin(), vocab.end()), init_scale,
      seed);
}

int run_synth(const std::string& out_dir, const SynthConfig& cfg,
              std::uint64_t seed) {
  std::filesystem::create_directories(out_dir);
  std::mt19937_64 rng(seed);
  const SynthOutput out = synth_corpus(cfg, rng);

  write_corpus(out_dir + "/corpus.jsonl", out.corpus);
  std::vector<std::vector<std::string>> tokens;
  for (const CorpusRecord& rec : out.corpus) tokens.push_back(split_ws(rec.raw));
  write_bracketed(out_dir + "/gold.brackets", out.gold, tokens);
  write_paraphrase_records(out_dir + "/paraphrases.jsonl", out.paraphrases);
  Checkpoint gold_ck;
  gold_ck.grammar = out.gold_grammar;
  gold_ck.adam = make_adam_state(out.gold_grammar);
  write_checkpoint(out_dir + "/gold_grammar.json", gold_ck);

  std::cout << "wrote " << out.corpus.size() << " sentences with "
            << cfg.paraphrases_per_sentence << " paraphrases each to "
            << out_dir << "\n";
  return 0;
}

int run_score(const std::string& para_path, const std::string& out_path,
              bool log_tf) {
  const std::vector<ParaphraseSet> sets = read_paraphrases(para_path);
  const DfIndex df = build_df_index(sets);
  ScoreOptions opts;
  opts.log_tf = log_tf;
  std::vector<SpanScoreTable> tables;
  tables.reserve(sets.size());
  for (const ParaphraseSet& ps : sets)
    tables.push_back(span_seminfo_table(ps, df, opts));
  write_scores(out_path, tables);
  std::cout << "scored " << tables.size() << " sentences -> " << out_path
            << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"seminfo: unsupervised constituency parsing toolkit"};
  app.require_subcommand(1);

  std::string config_path;
  std::uint64_t seed = 0;
  int jobs = 1;
  app.add_option("--config", config_path,
                 "key = value training configuration file")
      ->check(CLI::ExistingFile);
  const auto seed_opt =
      app.add_option("--seed", seed, "seed overriding the configured one");
  app.add_option("--jobs", jobs, "request-concurrency bound for paraphrase")
      ->check(CLI::PositiveNumber);

  // synth -------------------------------------------------------------------
  auto* synth = app.add_subcommand(
      "synth", "generate a synthetic corpus, gold trees, and paraphrases");
  std::string synth_out;
  SynthConfig synth_cfg;
  synth->add_option("--out", synth_out, "output directory")->required();
  synth->add_option("--size", synth_cfg.corpus_size, "number of sentences");
  synth->add_option("--min-len", synth_cfg.min_len, "minimum sentence length");
  synth->add_option("--max-len", synth_cfg.max_len, "maximum sentence length");
  synth->add_option("--paraphrases", synth_cfg.paraphrases_per_sentence,
                    "paraphrases per sentence");
  synth->add_option("--swap-prob", synth_cfg.swap_prob,
                    "per-node sibling swap probability");
  synth->add_option("--front-prob", synth_cfg.front_prob,
                    "constituent fronting probability");
  synth->add_flag("--identity-only", synth_cfg.identity_only,
                  "emit the source as every paraphrase");

  // paraphrase ----------------------------------------------------------------
  auto* para = app.add_subcommand(
      "paraphrase", "fetch paraphrases over HTTP (SEMINFO_API_KEY honored)");
  std::string para_corpus, para_out, para_progress;
  std::vector<std::string> para_templates;
  FetchConfig fetch_cfg;
  para->add_option("--corpus", para_corpus, "corpus JSONL")->required();
  para->add_option("--out", para_out, "paraphrase JSONL to append to")
      ->required();
  para->add_option("--progress", para_progress, "resume journal")->required();
  para->add_option("--endpoint", fetch_cfg.endpoint, "http(s)://host[:port]")
      ->required();
  para->add_option("--model", fetch_cfg.model, "model name");
  para->add_option("--lang", fetch_cfg.lang, "language substituted for {lang}");
  para->add_option("--samples-per-prompt", fetch_cfg.samples_per_prompt,
                   "completions requested per prompt");
  para->add_option("--max-retries", fetch_cfg.max_retries,
                   "retries per request");
  para->add_option("--backoff-ms", fetch_cfg.backoff_initial_ms,
                   "initial retry backoff");
  para->add_option("--timeout", fetch_cfg.timeout_s, "per-request timeout (s)");
  para->add_option("--template", para_templates,
                   "template names to use (default: first eight)");

  // score ---------------------------------------------------------------------
  auto* score = app.add_subcommand(
      "score", "build SemInfo span score tables from paraphrases");
  std::string score_para, score_out;
  bool no_log_tf = false;
  score->add_option("--paraphrases", score_para, "paraphrase JSONL")
      ->required();
  score->add_option("--out", score_out, "score JSONL")->required();
  score->add_flag("--no-log-tf", no_log_tf, "use raw frequencies as tf");

  // train ---------------------------------------------------------------------
  auto* train = app.add_subcommand("train", "run the REINFORCE trainer");
  std::string train_corpus, train_scores, train_out, train_gold, train_init,
      train_resume, opt_policy, opt_placement;
  bool zero_rewards = false, no_shuffle = false;
  int nonterminals = 10;
  double init_scale = 1.0;
  TrainRunConfig run_cfg;
  TrainingConfig flag_cfg;
  train->add_option("--corpus", train_corpus, "corpus JSONL")->required();
  train->add_option("--scores", train_scores, "span score JSONL");
  train->add_flag("--zero-rewards", zero_rewards,
                  "train with all-zero reward tables (LL-only data path)");
  train->add_option("--out", train_out, "checkpoint/metrics directory")
      ->required();
  train->add_option("--gold", train_gold,
                    "gold brackets for periodic corpus F1");
  train->add_option("--init", train_init, "checkpoint providing the initial "
                                          "grammar (default: random)");
  train->add_option("--resume", train_resume, "checkpoint to resume from");
  train->add_option("--nonterminals", nonterminals, "grammar size")
      ->check(CLI::PositiveNumber);
  train->add_option("--init-scale", init_scale, "random-init logit scale");
  train->add_option("--checkpoint-interval", run_cfg.checkpoint_interval,
                    "steps between checkpoints (0: first/last only)");
  train->add_option("--eval-interval", run_cfg.eval_interval,
                    "steps between corpus-F1 evaluations (0: never)");
  train->add_flag("--no-shuffle", no_shuffle, "keep corpus order per epoch");
  const auto t_policy = train->add_option("--policy", opt_policy,
                                          "treecrf-mbr | pcfg-posterior");
  const auto t_k = train->add_option("--samples-per-sentence",
                                     flag_cfg.samples_per_sentence);
  const auto t_beta = train->add_option("--entropy-coef", flag_cfg.entropy_coef);
  const auto t_place = train->add_option("--entropy-placement", opt_placement,
                                         "inside-advantage | additive");
  const auto t_ll = train->add_option("--ll-weight", flag_cfg.ll_weight);
  const auto t_lr = train->add_option("--learning-rate", flag_cfg.learning_rate);
  const auto t_bs = train->add_option("--batch-size", flag_cfg.batch_size);
  const auto t_ms = train->add_option("--max-steps", flag_cfg.max_steps);
  const auto t_clip = train->add_option("--clip-norm", flag_cfg.clip_norm);

  // parse ---------------------------------------------------------------------
  auto* parse = app.add_subcommand("parse", "decode trees for a corpus");
  std::string parse_corpus, parse_out, parse_brackets, parse_mode = "mbr",
              parse_ck, parse_scores;
  parse->add_option("--corpus", parse_corpus, "corpus JSONL")->required();
  parse->add_option("--out", parse_out, "span-tree JSONL")->required();
  parse->add_option("--brackets", parse_brackets,
                    "also write PTB-style brackets here");
  parse->add_option("--mode", parse_mode,
                    "mbr | viterbi | mtd | left | right | random")
      ->check(CLI::IsMember({"mbr", "viterbi", "mtd", "left", "right",
                             "random"}));
  parse->add_option("--checkpoint", parse_ck, "checkpoint for mbr/viterbi");
  parse->add_option("--scores", parse_scores, "score JSONL for mtd");

  // eval ----------------------------------------------------------------------
  auto* eval = app.add_subcommand("eval", "score predictions against gold");
  std::string eval_pred, eval_gold, eval_corpus, eval_out;
  eval->add_option("--pred", eval_pred, "predicted span-tree JSONL")
      ->required();
  eval->add_option("--gold", eval_gold, "gold brackets")->required();
  eval->add_option("--corpus", eval_corpus, "corpus JSONL (for punctuation "
                                            "masks)")
      ->required();
  eval->add_option("--out", eval_out, "JSON report path");

  // correlate -----------------------------------------------------------------
  auto* corr = app.add_subcommand(
      "correlate", "per-sentence F1 correlation across checkpoints");
  std::string corr_corpus, corr_scores, corr_gold, corr_dir, corr_out,
      corr_table;
  std::vector<std::string> corr_cks, corr_windows;
  corr->add_option("--corpus", corr_corpus, "corpus JSONL")->required();
  corr->add_option("--scores", corr_scores, "span score JSONL")->required();
  corr->add_option("--gold", corr_gold, "gold brackets")->required();
  corr->add_option("--checkpoint", corr_cks, "checkpoint files (>= 3)");
  corr->add_option("--checkpoint-dir", corr_dir,
                   "directory of checkpoint_*.json files");
  corr->add_option("--out", corr_out, "CSV output path")->required();
  corr->add_option("--table", corr_table, "text report path");
  corr->add_option("--window", corr_windows,
                   "step window lo:hi (repeatable)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*synth) return run_synth(synth_out, synth_cfg, seed);

    if (*para) {
      if (!para_templates.empty()) {
        const auto& defaults = default_prompt_templates();
        for (const std::string& name : para_templates) {
          bool found = false;
          for (const PromptTemplate& t : defaults)
            if (t.name == name) {
              fetch_cfg.templates.push_back(t);
              found = true;
            }
          if (!found) {
            std::string names;
            for (const PromptTemplate& t : defaults)
              names += (names.empty() ? "" : ", ") + t.name;
            throw std::runtime_error("unknown template '" + name +
                                     "' (have: " + names + ")");
          }
        }
      }
      fetch_cfg.concurrency = jobs;
      const std::vector<CorpusRecord> corpus = read_corpus(para_corpus);
      const FetchOutcome outcome =
          fetch_paraphrases(fetch_cfg, corpus, para_out, para_progress);
      std::cout << "completed " << outcome.completed << "  skipped "
                << outcome.skipped << "  failed " << outcome.failed
                << (outcome.aborted ? "  ABORTED (resume to continue)" : "")
                << "\n";
      return outcome.aborted ? 1 : 0;
    }

    if (*score) return run_score(score_para, score_out, !no_log_tf);

    if (*train) {
      TrainingConfig cfg;
      if (!config_path.empty()) cfg = read_training_config(config_path);
      if (*t_policy) cfg.policy = policy_from_string(opt_policy);
      if (*t_k) cfg.samples_per_sentence = flag_cfg.samples_per_sentence;
      if (*t_beta) cfg.entropy_coef = flag_cfg.entropy_coef;
      if (*t_place) cfg.entropy_placement = placement_from_string(opt_placement);
      if (*t_ll) cfg.ll_weight = flag_cfg.ll_weight;
      if (*t_lr) cfg.learning_rate = flag_cfg.learning_rate;
      if (*t_bs) cfg.batch_size = flag_cfg.batch_size;
      if (*t_ms) cfg.max_steps = flag_cfg.max_steps;
      if (*t_clip) cfg.clip_norm = flag_cfg.clip_norm;
      if (*seed_opt) cfg.seed = seed;
      validate_config(cfg);
      run_cfg.opt = cfg;
      run_cfg.shuffle = !no_shuffle;
      run_cfg.out_dir = train_out;

      if (train_scores.empty() == !zero_rewards)
        throw std::runtime_error(
            "pass exactly one of --scores and --zero-rewards");

      const std::vector<CorpusRecord> corpus = read_corpus(train_corpus);
      Grammar init;
      if (!train_init.empty())
        init = read_checkpoint(train_init).grammar;
      else
        init = grammar_for_corpus(corpus, nonterminals, init_scale, cfg.seed);

      std::map<std::string, SpanScoreTable> tables;
      if (!train_scores.empty()) tables = scores_by_id(train_scores);
      std::vector<GoldTree> gold;
      if (!train_gold.empty()) gold = load_gold_for(train_gold, corpus);

      std::vector<TrainExample> examples;
      std::vector<GoldTree> aligned_gold;
      for (std::size_t i = 0; i < corpus.size(); ++i) {
        const CorpusRecord& rec = corpus[i];
        const auto ids = init.map_tokens(rec.normalized.normalized_tokens);
        if (ids.empty()) {
          std::cerr << "[seminfo] skipping empty sentence '" << rec.id
                    << "'\n";
          continue;
        }
        SpanScoreTable table;
        if (zero_rewards) {
          table.id = rec.id;
          table.n = static_cast<std::uint32_t>(ids.size());
        } else {
          table = score_for(tables, rec);
        }
        examples.push_back({ids, std::move(table)});
        if (!gold.empty())
          aligned_gold.push_back(
              remap_gold(gold[i], keep_mask(rec.normalized), rec.id));
      }

      Checkpoint resume;
      const bool resuming = !train_resume.empty();
      if (resuming) resume = read_checkpoint(train_resume);
      const TrainRunResult result = run_training(
          init, examples, gold.empty() ? nullptr : &aligned_gold, run_cfg,
          resuming ? &resume : nullptr);
      std::cout << "trained " << result.stats.size() << " steps; metrics in "
                << result.metrics_path << "; final checkpoint "
                << result.checkpoint_paths.back() << "\n";
      return 0;
    }

    if (*parse) {
      const std::vector<CorpusRecord> corpus = read_corpus(parse_corpus);
      Grammar g;
      std::map<std::string, SpanScoreTable> tables;
      if (parse_mode == "mbr" || parse_mode == "viterbi") {
        if (parse_ck.empty())
          throw std::runtime_error("--mode " + parse_mode +
                                   " needs --checkpoint");
        g = read_checkpoint(parse_ck).grammar;
      }
      if (parse_mode == "mtd") {
        if (parse_scores.empty())
          throw std::runtime_error("--mode mtd needs --scores");
        tables = scores_by_id(parse_scores);
      }
      std::mt19937_64 rng(seed);

      std::vector<TreeRecord> records;
      std::vector<std::vector<std::string>> token_lists;
      for (const CorpusRecord& rec : corpus) {
        const auto& tokens = rec.normalized.normalized_tokens;
        if (tokens.empty()) {
          std::cerr << "[seminfo] skipping empty sentence '" << rec.id
                    << "'\n";
          continue;
        }
        const auto n = static_cast<std::uint32_t>(tokens.size());
        ConstituentTree tree;
        if (parse_mode == "mbr")
          tree = parse_mbr(g, g.map_tokens(tokens));
        else if (parse_mode == "viterbi")
          tree = viterbi_tree(g, g.map_tokens(tokens));
        else if (parse_mode == "mtd")
          tree = parse_mtd(score_for(tables, rec));
        else if (parse_mode == "left")
          tree = parse_baseline(n, BaselineKind::kLeft);
        else if (parse_mode == "right")
          tree = parse_baseline(n, BaselineKind::kRight);
        else
          tree = parse_baseline(n, BaselineKind::kRandom, &rng);
        records.push_back({rec.id, std::move(tree)});
        token_lists.push_back(tokens);
      }
      write_trees_jsonl(parse_out, records);
      if (!parse_brackets.empty()) {
        std::ofstream out(parse_brackets, std::ios::binary | std::ios::trunc);
        if (!out)
          throw std::runtime_error("cannot open " + parse_brackets +
                                   " for writing");
        for (std::size_t i = 0; i < records.size(); ++i)
          out << tree_to_brackets(records[i].tree, token_lists[i]) << "\n";
      }
      std::cout << "parsed " << records.size() << " sentences -> " << parse_out
                << "\n";
      return 0;
    }

    if (*eval) {
      const std::vector<CorpusRecord> corpus = read_corpus(eval_corpus);
      const std::vector<GoldTree> gold = load_gold_for(eval_gold, corpus);
      std::map<std::string, ConstituentTree> preds;
      for (TreeRecord& r : read_trees_jsonl(eval_pred))
        preds.emplace(r.id, std::move(r.tree));

      std::vector<ConstituentTree> pred_list;
      std::vector<std::vector<bool>> keeps;
      std::vector<std::optional<double>> per_sentence;
      std::set<std::string> label_set;
      json sentences = json::array();
      for (std::size_t i = 0; i < corpus.size(); ++i) {
        const auto it = preds.find(corpus[i].id);
        if (it == preds.end())
          throw std::runtime_error("no prediction for sentence '" +
                                   corpus[i].id + "'");
        pred_list.push_back(it->second);
        keeps.push_back(keep_mask(corpus[i].normalized));
        per_sentence.push_back(
            sentence_f1(pred_list.back(), gold[i], keeps.back()));
        for (const LabeledSpan& ls : gold[i].labeled_spans)
          label_set.insert(ls.label);
        sentences.push_back(
            {{"id", corpus[i].id},
             {"f1", per_sentence.back() ? json(*per_sentence.back())
                                        : json()}});
      }
      const double f1 = corpus_f1(per_sentence);
      const auto recalls = label_recall(
          pred_list, gold, keeps,
          std::vector<std::string>(label_set.begin(), label_set.end()));
      int evaluated = 0;
      for (const auto& v : per_sentence) evaluated += v.has_value();

      json report = {{"corpus_f1", f1},
                     {"evaluated", evaluated},
                     {"skipped",
                      static_cast<int>(per_sentence.size()) - evaluated},
                     {"sentences", sentences}};
      for (const auto& [label, lr] : recalls)
        report["label_recall"][label] = {{"recall", lr.recall},
                                         {"support", lr.support}};
      if (!eval_out.empty()) {
        std::ofstream out(eval_out, std::ios::binary | std::ios::trunc);
        if (!out)
          throw std::runtime_error("cannot open " + eval_out +
                                   " for writing");
        out << report.dump(2) << "\n";
      }
      std::printf("corpus F1 %.4f over %d sentences (%d skipped)\n", f1,
                  evaluated,
                  static_cast<int>(per_sentence.size()) - evaluated);
      return 0;
    }

    if (*corr) {
      std::vector<std::string> paths = corr_cks;
      if (!corr_dir.empty()) {
        for (const auto& entry :
             std::filesystem::directory_iterator(corr_dir)) {
          const std::string name = entry.path().filename().string();
          if (name.rfind("checkpoint_", 0) == 0 &&
              name.size() > 5 && name.substr(name.size() - 5) == ".json")
            paths.push_back(entry.path().string());
        }
        std::sort(paths.begin(), paths.end());
      }
      if (paths.size() < 3)
        throw std::runtime_error("correlate needs at least three checkpoints");

      std::vector<CheckpointEntry> entries;
      for (const std::string& p : paths) {
        Checkpoint ck = read_checkpoint(p);
        entries.push_back({ck.step, std::move(ck.grammar)});
      }
      std::sort(entries.begin(), entries.end(),
                [](const CheckpointEntry& a, const CheckpointEntry& b) {
                  return a.step < b.step;
                });

      const std::vector<CorpusRecord> corpus = read_corpus(corr_corpus);
      const auto tables = scores_by_id(corr_scores);
      const std::vector<GoldTree> gold = load_gold_for(corr_gold, corpus);
      std::vector<std::vector<int>> sentences;
      std::vector<SpanScoreTable> aligned_scores;
      std::vector<GoldTree> aligned_gold;
      for (std::size_t i = 0; i < corpus.size(); ++i) {
        const auto& rec = corpus[i];
        const auto ids =
            entries[0].grammar.map_tokens(rec.normalized.normalized_tokens);
        if (ids.empty()) continue;
        sentences.push_back(ids);
        aligned_scores.push_back(score_for(tables, rec));
        aligned_gold.push_back(
            remap_gold(gold[i], keep_mask(rec.normalized), rec.id));
      }

      CorrelationConfig ccfg;
      for (const std::string& w : corr_windows) {
        const auto colon = w.find(':');
        if (colon == std::string::npos)
          throw std::runtime_error("bad --window '" + w + "', want lo:hi");
        ccfg.windows.push_back({std::stoll(w.substr(0, colon)),
                                std::stoll(w.substr(colon + 1))});
      }
      const CorrelationReport report = correlation_study(
          entries, sentences, aligned_scores, aligned_gold, ccfg);

      std::ofstream out(corr_out, std::ios::binary | std::ios::trunc);
      if (!out)
        throw std::runtime_error("cannot open " + corr_out + " for writing");
      out << report.csv;
      if (!corr_table.empty()) {
        std::ofstream tout(corr_table, std::ios::binary | std::ios::trunc);
        if (!tout)
          throw std::runtime_error("cannot open " + corr_table +
                                   " for writing");
        tout << report.table;
      }
      std::cout << report.table;
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "seminfo: error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
