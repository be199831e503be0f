#include "seminfo/corpusio.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "doctest.h"
#include "seminfo/parse.hpp"

using namespace seminfo;

namespace {

std::string fresh_dir(const std::string& name) {
  const auto p = std::filesystem::temp_directory_path() / ("seminfo_" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p.string();
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::string message_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const std::exception& e) {
    return e.what();
  }
  return "";
}

std::vector<std::string> split_ws(const std::string& s) {
  std::istringstream in(s);
  std::vector<std::string> out;
  std::string w;
  while (in >> w) out.push_back(w);
  return out;
}

}  // namespace

TEST_CASE("corpus files round-trip and reject duplicates") {
  const std::string dir = fresh_dir("corpus");
  std::vector<CorpusRecord> recs;
  for (const auto& [id, text] :
       std::vector<std::pair<std::string, std::string>>{
           {"s1", "The dog barked ."},
           {"s2", "Every cat watched the birds"},
           {"s3", "a man walked in the park"}}) {
    CorpusRecord r;
    r.id = id;
    r.raw = text;
    recs.push_back(r);
  }
  const std::string path = dir + "/corpus.jsonl";
  write_corpus(path, recs);
  const auto got = read_corpus(path);
  REQUIRE(got.size() == 3);
  for (std::size_t i = 0; i < recs.size(); ++i) {
    CHECK(got[i].id == recs[i].id);
    CHECK(got[i].raw == recs[i].raw);
    CHECK(got[i].normalized.normalized_tokens ==
          normalize_text(recs[i].raw).normalized_tokens);
  }
  CHECK(got[0].normalized.normalized_tokens ==
        std::vector<std::string>{"the", "dog", "bark"});

  write_text(dir + "/dup.jsonl",
             "{\"id\":\"a\",\"text\":\"x y\"}\n"
             "\n"
             "{\"id\":\"a\",\"text\":\"z w\"}\n");
  const std::string msg =
      message_of([&] { read_corpus(dir + "/dup.jsonl"); });
  CHECK(msg.find(":3:") != std::string::npos);
  CHECK(msg.find("duplicate") != std::string::npos);

  write_text(dir + "/bad.jsonl", "{\"id\":\"a\",\"text\":\"x\"}\nnot json\n");
  CHECK(message_of([&] { read_corpus(dir + "/bad.jsonl"); }).find(":2:") !=
        std::string::npos);
  CHECK_THROWS_AS(read_corpus(dir + "/missing.jsonl"), std::runtime_error);
}

TEST_CASE("paraphrase files round-trip through raw and normalized views") {
  const std::string dir = fresh_dir("para");
  std::vector<RawParaphraseRecord> recs(3);
  recs[0] = {"p1", "the dog barked", {"barked the dog", "the dog barked"}, ""};
  recs[1] = {"p2", "a cat slept", {}, ""};
  recs[2] = {"p3", "some man ran", {"ran some man"}, "topicalize: HTTP 500"};
  const std::string path = dir + "/para.jsonl";
  write_paraphrase_records(path, recs);

  const auto raw = read_paraphrase_records(path);
  REQUIRE(raw.size() == 3);
  for (std::size_t i = 0; i < recs.size(); ++i) {
    CHECK(raw[i].id == recs[i].id);
    CHECK(raw[i].source == recs[i].source);
    CHECK(raw[i].paraphrases == recs[i].paraphrases);
    CHECK(raw[i].error == recs[i].error);
  }

  const auto sets = read_paraphrases(path);
  REQUIRE(sets.size() == 3);
  CHECK(sets[0].id == "p1");
  CHECK(sets[0].source.normalized_tokens ==
        std::vector<std::string>{"the", "dog", "bark"});
  REQUIRE(sets[0].paraphrases.size() == 2);
  CHECK(sets[0].paraphrases[0].normalized_tokens ==
        std::vector<std::string>{"bark", "the", "dog"});
  CHECK(sets[1].paraphrases.empty());  // N = 0

  write_text(dir + "/empty.jsonl", "");
  CHECK(read_paraphrases(dir + "/empty.jsonl").empty());

  write_text(dir + "/dup.jsonl",
             "{\"id\":\"a\",\"source\":\"x y\",\"paraphrases\":[]}\n"
             "{\"id\":\"a\",\"source\":\"x y\",\"paraphrases\":[]}\n");
  CHECK_THROWS_AS(read_paraphrases(dir + "/dup.jsonl"), std::runtime_error);

  write_text(dir + "/punct.jsonl",
             "{\"id\":\"a\",\"source\":\". . !\",\"paraphrases\":[]}\n");
  const std::string msg =
      message_of([&] { read_paraphrases(dir + "/punct.jsonl"); });
  CHECK(msg.find(":1:") != std::string::npos);
  CHECK(msg.find("zero tokens") != std::string::npos);
}

TEST_CASE("tree span files round-trip") {
  const std::string dir = fresh_dir("trees");
  std::mt19937_64 rng(77);
  std::vector<TreeRecord> recs;
  for (int k = 0; k < 20; ++k) {
    const std::uint32_t n = 1 + static_cast<std::uint32_t>(rng() % 8);
    recs.push_back({"t" + std::to_string(k),
                    parse_baseline(n, BaselineKind::kRandom, &rng)});
  }
  const std::string path = dir + "/trees.jsonl";
  write_trees_jsonl(path, recs);
  const auto got = read_trees_jsonl(path);
  REQUIRE(got.size() == recs.size());
  for (std::size_t i = 0; i < recs.size(); ++i) {
    CHECK(got[i].id == recs[i].id);
    CHECK(got[i].tree == recs[i].tree);
  }

  write_text(dir + "/cross.jsonl",
             "{\"id\":\"x\",\"n\":3,\"spans\":[[0,2],[1,3],[0,3]]}\n");
  CHECK_THROWS_AS(read_trees_jsonl(dir + "/cross.jsonl"), std::runtime_error);
  write_text(dir + "/arity.jsonl",
             "{\"id\":\"x\",\"n\":2,\"spans\":[[0]]}\n");
  const std::string msg =
      message_of([&] { read_trees_jsonl(dir + "/arity.jsonl"); });
  CHECK(msg.find(":1:") != std::string::npos);
}

namespace {

struct BracketFixture {
  std::string line;
  std::uint32_t n;
  std::vector<std::tuple<std::uint32_t, std::uint32_t, std::string>> spans;
  std::vector<std::string> tokens;
};

// Hand-tabulated reference spans: preterminals contribute nothing unless the
// whole tree is a single preterminal.
const std::vector<BracketFixture>& bracket_fixtures() {
  static const std::vector<BracketFixture> kFixtures = {
      {"(S (NP (DT the) (NN dog)) (VP (VBZ barks)))",
       3,
       {{0, 2, "NP"}, {2, 3, "VP"}, {0, 3, "S"}},
       {"the", "dog", "barks"}},
      {"(NP dog)", 1, {{0, 1, "NP"}}, {"dog"}},
      {"(S (NP (DT the) (NN dog)))",
       2,
       {{0, 2, "S"}, {0, 2, "NP"}},
       {"the", "dog"}},
      {"(S (A a) (B b) (C c))", 3, {{0, 3, "S"}}, {"a", "b", "c"}},
      {"(VP (VBZ barks))", 1, {{0, 1, "VP"}}, {"barks"}},
      {"(S (NP (NP (DT the) (NN dog)) (PP (IN in) (NP (DT the) (NN park)))) "
       "(VP (VBZ barks)))",
       6,
       {{0, 2, "NP"},
        {3, 5, "NP"},
        {2, 5, "PP"},
        {0, 5, "NP"},
        {5, 6, "VP"},
        {0, 6, "S"}},
       {"the", "dog", "in", "the", "park", "barks"}},
      {"(X (X a) (X b))", 2, {{0, 2, "X"}}, {"a", "b"}},
      {"(S (VP (VB go)) (NP (NN home)))",
       2,
       {{0, 1, "VP"}, {1, 2, "NP"}, {0, 2, "S"}},
       {"go", "home"}},
      {"(TOP (S (NP (PRP he)) (VP (VBD ran))))",
       2,
       {{0, 1, "NP"}, {1, 2, "VP"}, {0, 2, "S"}, {0, 2, "TOP"}},
       {"he", "ran"}},
      {"(A (B (C (D d))))",
       1,
       {{0, 1, "A"}, {0, 1, "B"}, {0, 1, "C"}},
       {"d"}},
      {"(S (NP (DT every) (NN cat)) (VP (VBZ sees) (NP (DT a) (NN bird))))",
       5,
       {{0, 2, "NP"}, {3, 5, "NP"}, {2, 5, "VP"}, {0, 5, "S"}},
       {"every", "cat", "sees", "a", "bird"}},
      {"(ROOT (FRAG (RB not) (ADJP (JJ good))))",
       2,
       {{1, 2, "ADJP"}, {0, 2, "FRAG"}, {0, 2, "ROOT"}},
       {"not", "good"}},
      {"(S (CC and) (NP (NN rain)))",
       2,
       {{1, 2, "NP"}, {0, 2, "S"}},
       {"and", "rain"}},
      {"(S (NP (NN dogs)) (VP (VBP bark) (ADVP (RB loudly))))",
       3,
       {{0, 1, "NP"}, {2, 3, "ADVP"}, {1, 3, "VP"}, {0, 3, "S"}},
       {"dogs", "bark", "loudly"}},
      {"(S (S (NP (NN cats)) (VP (VBP purr))) (CC but) (S (NP (NN dogs)) "
       "(VP (VBP bark))))",
       5,
       {{0, 1, "NP"},
        {1, 2, "VP"},
        {0, 2, "S"},
        {3, 4, "NP"},
        {4, 5, "VP"},
        {3, 5, "S"},
        {0, 5, "S"}},
       {"cats", "purr", "but", "dogs", "bark"}},
      {"(NP (NP (NN lord)) (PP (IN of) (NP (NN rings))))",
       3,
       {{0, 1, "NP"}, {2, 3, "NP"}, {1, 3, "PP"}, {0, 3, "NP"}},
       {"lord", "of", "rings"}},
      {"(X (Y (Z (X x) (Y y)) (Z z)))",
       3,
       {{0, 2, "Z"}, {0, 3, "Y"}, {0, 3, "X"}},
       {"x", "y", "z"}},
      {"(S (INTJ (UH oh)) (, ,) (NP (PRP it)) (VP (VBD fell)))",
       4,
       {{0, 1, "INTJ"}, {2, 3, "NP"}, {3, 4, "VP"}, {0, 4, "S"}},
       {"oh", ",", "it", "fell"}},
      {"(A (B b) (A (B b) (A (B b) (A (B b)))))",
       4,
       {{3, 4, "A"}, {2, 4, "A"}, {1, 4, "A"}, {0, 4, "A"}},
       {"b", "b", "b", "b"}},
      {"(S (NP (DT the) (JJ old) (NN man)) (VP (VBD sat)))",
       4,
       {{0, 3, "NP"}, {3, 4, "VP"}, {0, 4, "S"}},
       {"the", "old", "man", "sat"}},
  };
  return kFixtures;
}

GoldTree expected_gold(const BracketFixture& f) {
  GoldTree g;
  g.n = f.n;
  for (const auto& [i, j, label] : f.spans)
    g.labeled_spans.insert({{i, j}, label});
  return g;
}

}  // namespace

TEST_CASE("bracket reading matches the hand-extracted span tables") {
  const std::string dir = fresh_dir("brackets");
  const auto& fixtures = bracket_fixtures();
  REQUIRE(fixtures.size() == 20);
  std::string file;
  for (const auto& f : fixtures) file += f.line + "\n";
  const std::string path = dir + "/gold.brackets";
  write_text(path, file);

  const auto golds = read_bracketed(path);
  REQUIRE(golds.size() == fixtures.size());
  for (std::size_t i = 0; i < fixtures.size(); ++i) {
    const GoldTree want = expected_gold(fixtures[i]);
    CHECK(golds[i].n == want.n);
    CHECK(golds[i].labeled_spans == want.labeled_spans);
  }
}

TEST_CASE("bracket errors carry line and column positions") {
  const std::string dir = fresh_dir("bracket_errors");
  const auto expect_error = [&](const std::string& text,
                                const std::string& needle) {
    const std::string path = dir + "/bad.brackets";
    write_text(path, text + "\n");
    const std::string msg = message_of([&] { read_bracketed(path); });
    CAPTURE(text);
    CAPTURE(msg);
    CHECK(msg.find(":1:") != std::string::npos);
    CHECK(msg.find(needle) != std::string::npos);
  };
  expect_error("(S (NP dog)", "unbalanced");
  expect_error("(S)", "children");
  expect_error(")", "expected '('");
  expect_error("(S dog) extra", "trailing");
  expect_error("(S (NP dog) word)", "unexpected token");
  expect_error("( (A a))", "label");
  expect_error("(A a) (B b)", "trailing");
}

TEST_CASE("bracket writing inverts reading") {
  const std::string dir = fresh_dir("bracket_roundtrip");
  const auto& fixtures = bracket_fixtures();
  const auto golds = [&] {
    std::string file;
    for (const auto& f : fixtures) file += f.line + "\n";
    write_text(dir + "/in.brackets", file);
    return read_bracketed(dir + "/in.brackets");
  }();

  std::vector<std::vector<std::string>> tokens;
  for (const auto& f : fixtures) tokens.push_back(f.tokens);
  write_bracketed(dir + "/out.brackets", golds, tokens);
  const auto again = read_bracketed(dir + "/out.brackets");
  REQUIRE(again.size() == golds.size());
  for (std::size_t i = 0; i < golds.size(); ++i) {
    CHECK(again[i].n == golds[i].n);
    CHECK(again[i].labeled_spans == golds[i].labeled_spans);
  }

  const ConstituentTree left = parse_baseline(3, BaselineKind::kLeft);
  CHECK(tree_to_brackets(left, {"a", "b", "c"}) ==
        "(X (X (X a) (X b)) (X c))");
  write_text(dir + "/tree.brackets", tree_to_brackets(left, {"a", "b", "c"}));
  const auto from_tree = read_bracketed(dir + "/tree.brackets");
  REQUIRE(from_tree.size() == 1);
  CHECK(from_tree[0].labeled_spans ==
        std::set<LabeledSpan>{{{0, 2}, "X"}, {{0, 3}, "X"}});

  GoldTree crossing;
  crossing.n = 4;
  crossing.labeled_spans = {{{0, 4}, "S"}, {{0, 2}, "A"}, {{1, 3}, "B"}};
  CHECK_THROWS_AS(gold_to_brackets(crossing, {"a", "b", "c", "d"}),
                  std::invalid_argument);
  GoldTree rootless;
  rootless.n = 3;
  rootless.labeled_spans = {{{0, 2}, "A"}};
  CHECK_THROWS_AS(gold_to_brackets(rootless, {"a", "b", "c"}),
                  std::invalid_argument);
  GoldTree ok;
  ok.n = 2;
  ok.labeled_spans = {{{0, 2}, "S"}};
  CHECK_THROWS_AS(gold_to_brackets(ok, {"a"}), std::invalid_argument);
}

TEST_CASE("score files round-trip bit-exactly") {
  const std::string dir = fresh_dir("scores");
  std::vector<SpanScoreTable> tables(3);
  tables[0].id = "t1";
  tables[0].n = 6;
  tables[0].scores[{0, 2}] = 0.1;
  tables[0].scores[{1, 4}] = 1e-300;
  tables[0].scores[{2, 6}] = 0.30000000000000004;
  tables[0].scores[{0, 5}] = 1.0 / 3.0;
  tables[1].id = "t2";
  tables[1].n = 2;  // no admissible spans
  tables[2].id = "t3";
  tables[2].n = 4;
  tables[2].scores[{0, 3}] = 3.141592653589793;
  tables[2].scores[{1, 3}] = 2.2250738585072014e-308;

  const std::string path = dir + "/scores.jsonl";
  write_scores(path, tables);
  const auto got = read_scores(path);
  REQUIRE(got.size() == tables.size());
  for (std::size_t i = 0; i < tables.size(); ++i) {
    CHECK(got[i].id == tables[i].id);
    CHECK(got[i].n == tables[i].n);
    CHECK(got[i].scores == tables[i].scores);  // exact double equality
  }

  const auto expect_error = [&](const std::string& text) {
    write_text(dir + "/bad.jsonl", text);
    CHECK_THROWS_AS(read_scores(dir + "/bad.jsonl"), std::runtime_error);
  };
  expect_error("{\"id\":\"x\",\"n\":4,\"spans\":[[0,2,-1.0]]}\n");
  expect_error("{\"id\":\"x\",\"n\":4,\"spans\":[[0,1,1.0]]}\n");
  expect_error("{\"id\":\"x\",\"n\":4,\"spans\":[[3,2,1.0]]}\n");
  expect_error("{\"id\":\"x\",\"n\":4,\"spans\":[[0,4,1.0]]}\n");
  expect_error(
      "{\"id\":\"x\",\"n\":4,\"spans\":[[0,2,1.0],[0,2,2.0]]}\n");
  expect_error("{\"id\":\"x\",\"n\":4,\"spans\":[[0,2]]}\n");
  expect_error(
      "{\"id\":\"x\",\"n\":4,\"spans\":[]}\n{\"id\":\"x\",\"n\":3,\"spans\":[]}\n");
}

TEST_CASE("checkpoints round-trip bit-exactly") {
  const std::string dir = fresh_dir("checkpoints");
  Checkpoint c;
  c.step = 42;
  c.grammar = random_grammar(3, {"alpha", "beta", "gamma"}, 0.7, 99);
  c.adam = make_adam_state(c.grammar);
  c.adam.t = 17;
  c.adam.m_binary[0] = 1e-308;
  c.adam.v_binary[1] = 0.1;
  c.adam.m_lexical[2] = -2.5e17;
  c.adam.v_lexical[3] = 4.9406564584124654e-324;  // denormal
  c.reward_sum = 1.0 / 7.0;
  c.reward_count = 12;
  std::mt19937_64 rng(9);
  rng.discard(100);
  {
    std::ostringstream s;
    s << rng;
    c.rng_state = s.str();
  }

  const std::string path = dir + "/ck.json";
  write_checkpoint(path, c);
  const Checkpoint got = read_checkpoint(path);
  CHECK(got.step == c.step);
  CHECK(got.grammar.num_nonterminals == c.grammar.num_nonterminals);
  CHECK(got.grammar.start == c.grammar.start);
  CHECK(got.grammar.terminal_vocab == c.grammar.terminal_vocab);
  CHECK(got.grammar.binary_logits == c.grammar.binary_logits);
  CHECK(got.grammar.lexical_logits == c.grammar.lexical_logits);
  CHECK(got.adam.t == c.adam.t);
  CHECK(got.adam.m_binary == c.adam.m_binary);
  CHECK(got.adam.v_binary == c.adam.v_binary);
  CHECK(got.adam.m_lexical == c.adam.m_lexical);
  CHECK(got.adam.v_lexical == c.adam.v_lexical);
  CHECK(got.reward_sum == c.reward_sum);
  CHECK(got.reward_count == c.reward_count);
  CHECK(got.rng_state == c.rng_state);

  // The restored stream state continues the original sequence.
  std::mt19937_64 restored;
  std::istringstream(got.rng_state) >> restored;
  CHECK(restored() == rng());
  CHECK(restored() == rng());

  // Non-finite logits (forbidden rules) survive the trip.
  std::mt19937_64 synth_rng(5);
  SynthConfig scfg;
  scfg.corpus_size = 1;
  scfg.paraphrases_per_sentence = 0;
  Checkpoint inf_ck;
  inf_ck.grammar = synth_corpus(scfg, synth_rng).gold_grammar;
  inf_ck.adam = make_adam_state(inf_ck.grammar);
  write_checkpoint(dir + "/inf.json", inf_ck);
  const Checkpoint inf_got = read_checkpoint(dir + "/inf.json");
  CHECK(inf_got.grammar.binary_logits == inf_ck.grammar.binary_logits);
  CHECK(inf_got.grammar.lexical_logits == inf_ck.grammar.lexical_logits);

  // Version and shape tampering are rejected.
  std::string text = read_text(path);
  const auto vpos = text.find("\"version\": 1");
  REQUIRE(vpos != std::string::npos);
  std::string tampered = text;
  tampered.replace(vpos, 12, "\"version\": 2");
  write_text(dir + "/v2.json", tampered);
  CHECK(message_of([&] { read_checkpoint(dir + "/v2.json"); })
            .find("version") != std::string::npos);
  tampered = text;
  const auto npos = tampered.find("\"num_nonterminals\": 3");
  REQUIRE(npos != std::string::npos);
  tampered.replace(npos, 21, "\"num_nonterminals\": 4");
  write_text(dir + "/shape.json", tampered);
  CHECK(message_of([&] { read_checkpoint(dir + "/shape.json"); })
            .find("dimensions") != std::string::npos);
  write_text(dir + "/garbage.json", "not json");
  CHECK_THROWS_AS(read_checkpoint(dir + "/garbage.json"), std::runtime_error);
  CHECK_THROWS_AS(read_checkpoint(dir + "/missing.json"), std::runtime_error);
}

TEST_CASE("config files mirror the training options") {
  const std::string text =
      "# optimizer\n"
      "policy = pcfg-posterior\n"
      "samples_per_sentence = 4\n"
      "entropy_coef = 0.25   # exploration\n"
      "entropy_placement = additive\n"
      "ll_weight = 2.5\n"
      "learning_rate = 0.125\n"
      "batch_size = 7\n"
      "max_steps = 321\n"
      "seed = 18446744073709551615\n"
      "clip_norm = 9.5\n";
  const TrainingConfig cfg = parse_config_text(text);
  CHECK(cfg.policy == PolicyKind::kPcfgPosterior);
  CHECK(cfg.samples_per_sentence == 4);
  CHECK(cfg.entropy_coef == 0.25);
  CHECK(cfg.entropy_placement == EntropyPlacement::kAdditive);
  CHECK(cfg.ll_weight == 2.5);
  CHECK(cfg.learning_rate == 0.125);
  CHECK(cfg.batch_size == 7);
  CHECK(cfg.max_steps == 321);
  CHECK(cfg.seed == 18446744073709551615ULL);
  CHECK(cfg.clip_norm == 9.5);

  // Omitted keys keep the base values.
  TrainingConfig base;
  base.batch_size = 3;
  const TrainingConfig partial = parse_config_text("max_steps = 5\n", base);
  CHECK(partial.batch_size == 3);
  CHECK(partial.max_steps == 5);

  CHECK(message_of([&] { parse_config_text("wat = 1\n"); })
            .find("unknown key") != std::string::npos);
  CHECK(message_of([&] { parse_config_text("\n\nlearning_rate = abc\n"); })
            .find("line 3") != std::string::npos);
  CHECK_THROWS_AS(parse_config_text("policy = bogus\n"), std::runtime_error);
  CHECK_THROWS_AS(parse_config_text("just words\n"), std::runtime_error);
  CHECK_THROWS_AS(parse_config_text("learning_rate = -0.5\n"),
                  std::invalid_argument);

  const std::string dir = fresh_dir("config");
  write_text(dir + "/train.cfg", text);
  const TrainingConfig from_file = read_training_config(dir + "/train.cfg");
  CHECK(from_file.seed == cfg.seed);
  CHECK(from_file.batch_size == cfg.batch_size);
  const std::string msg =
      message_of([&] { read_training_config(dir + "/none.cfg"); });
  CHECK(msg.find("none.cfg") != std::string::npos);
}

TEST_CASE("prompt templates carry the language placeholder") {
  const auto& templates = default_prompt_templates();
  CHECK(templates.size() == 9);
  std::set<std::string> names;
  for (const auto& t : templates) {
    CHECK_FALSE(t.name.empty());
    CHECK_FALSE(t.text.empty());
    CHECK(t.text.find("{lang}") != std::string::npos);
    names.insert(t.name);
  }
  CHECK(names.size() == templates.size());

  const std::string rendered = render_template(templates[0], "English");
  CHECK(rendered.find("English") != std::string::npos);
  CHECK(rendered.find("{lang}") == std::string::npos);
  CHECK(render_template({"x", "{lang} and {lang}"}, "Quenya") ==
        "Quenya and Quenya");
  CHECK_THROWS_AS(render_template({"x", ""}, "English"),
                  std::invalid_argument);
}

namespace {

// Oracle for the all-swaps transform: recursively emit right child before
// left, using the gold spans to recover the (binary) structure.
std::vector<std::string> mirror_yield(const std::set<Span>& spans,
                                      const std::vector<std::string>& toks,
                                      std::uint32_t i, std::uint32_t j) {
  if (j - i == 1) return {toks[i]};
  std::vector<std::pair<std::uint32_t, std::uint32_t>> kids;
  std::uint32_t p = i;
  while (p < j) {
    std::uint32_t best = p + 1;
    for (const Span& s : spans)
      if (s.i == p && s.j <= j && !(p == i && s.j == j))
        best = std::max(best, s.j);
    kids.push_back({p, best});
    p = best;
  }
  std::vector<std::string> out;
  for (auto it = kids.rbegin(); it != kids.rend(); ++it) {
    const auto sub = mirror_yield(spans, toks, it->first, it->second);
    out.insert(out.end(), sub.begin(), sub.end());
  }
  return out;
}

std::string join(const std::vector<std::string>& toks) {
  std::string out;
  for (std::size_t i = 0; i < toks.size(); ++i) {
    if (i) out += ' ';
    out += toks[i];
  }
  return out;
}

}  // namespace

TEST_CASE("the synthetic generator is deterministic and length-bounded") {
  SynthConfig cfg;
  cfg.corpus_size = 12;
  cfg.paraphrases_per_sentence = 6;
  cfg.swap_prob = 0.5;

  std::mt19937_64 r1(42), r2(42);
  const SynthOutput a = synth_corpus(cfg, r1);
  const SynthOutput b = synth_corpus(cfg, r2);
  REQUIRE(a.corpus.size() == 12);
  std::set<std::string> ids;
  for (std::size_t i = 0; i < a.corpus.size(); ++i) {
    CHECK(a.corpus[i].raw == b.corpus[i].raw);
    CHECK(a.gold[i].labeled_spans == b.gold[i].labeled_spans);
    CHECK(a.paraphrases[i].paraphrases == b.paraphrases[i].paraphrases);
    ids.insert(a.corpus[i].id);

    const auto toks = split_ws(a.corpus[i].raw);
    CHECK(toks.size() >= cfg.min_len);
    CHECK(toks.size() <= cfg.max_len);
    CHECK(a.gold[i].n == toks.size());
    CHECK(a.corpus[i].normalized.normalized_tokens.size() == toks.size());
    CHECK(a.gold[i].labeled_spans.count(
        {{0, static_cast<std::uint32_t>(toks.size())}, "S"}));
    REQUIRE(a.paraphrases[i].paraphrases.size() == 6);
    for (const std::string& p : a.paraphrases[i].paraphrases) {
      auto sorted_src = toks;
      auto sorted_par = split_ws(p);
      std::sort(sorted_src.begin(), sorted_src.end());
      std::sort(sorted_par.begin(), sorted_par.end());
      CHECK(sorted_src == sorted_par);  // token-multiset permutation
    }
  }
  CHECK(ids.size() == a.corpus.size());

  // The gold grammar assigns positive probability to its own sentences.
  for (int i = 0; i < 3; ++i) {
    const auto ids_raw =
        a.gold_grammar.map_tokens(split_ws(a.corpus[i].raw));
    CHECK(std::isfinite(inside(a.gold_grammar, ids_raw).log_z));
  }
  CHECK(a.gold_grammar.num_nonterminals <= 10);
  CHECK(a.gold_grammar.vocab_size() <= 50);
}

TEST_CASE("synthetic paraphrases move whole gold constituents") {
  // swap_prob = 1: every paraphrase is the full mirror image.
  SynthConfig cfg;
  cfg.corpus_size = 8;
  cfg.paraphrases_per_sentence = 3;
  cfg.swap_prob = 1.0;
  std::mt19937_64 rng(7);
  const SynthOutput out = synth_corpus(cfg, rng);
  for (std::size_t i = 0; i < out.corpus.size(); ++i) {
    const auto toks = split_ws(out.corpus[i].raw);
    std::set<Span> spans;
    for (const LabeledSpan& ls : out.gold[i].labeled_spans)
      spans.insert(ls.span);
    const std::string mirrored = join(
        mirror_yield(spans, toks, 0, static_cast<std::uint32_t>(toks.size())));
    for (const std::string& p : out.paraphrases[i].paraphrases)
      CHECK(p == mirrored);
  }

  // front_prob = 1, swap_prob = 0: some constituent (possibly a single
  // token) is moved to the front, the rest keeps its order.
  SynthConfig fcfg;
  fcfg.corpus_size = 8;
  fcfg.paraphrases_per_sentence = 5;
  fcfg.swap_prob = 0.0;
  fcfg.front_prob = 1.0;
  std::mt19937_64 frng(21);
  const SynthOutput fronted = synth_corpus(fcfg, frng);
  for (std::size_t i = 0; i < fronted.corpus.size(); ++i) {
    const auto toks = split_ws(fronted.corpus[i].raw);
    const auto n = static_cast<std::uint32_t>(toks.size());
    std::set<std::string> candidates;
    std::set<Span> spans;
    for (const LabeledSpan& ls : fronted.gold[i].labeled_spans)
      spans.insert(ls.span);
    for (std::uint32_t p = 0; p < n; ++p) spans.insert({p, p + 1});
    for (const Span& s : spans) {
      if (s.i == 0 && s.j == n) continue;
      std::vector<std::string> cand(toks.begin() + s.i, toks.begin() + s.j);
      cand.insert(cand.end(), toks.begin(), toks.begin() + s.i);
      cand.insert(cand.end(), toks.begin() + s.j, toks.end());
      candidates.insert(join(cand));
    }
    for (const std::string& p : fronted.paraphrases[i].paraphrases)
      CHECK(candidates.count(p) == 1);
  }

  // Identity transform: every paraphrase equals its source, and the source
  // is the unique maximal substring with frequency N.
  SynthConfig icfg;
  icfg.corpus_size = 2;
  icfg.paraphrases_per_sentence = 4;
  icfg.identity_only = true;
  std::mt19937_64 irng(3);
  const SynthOutput ident = synth_corpus(icfg, irng);
  const std::string dir = fresh_dir("synth_identity");
  write_paraphrase_records(dir + "/para.jsonl", ident.paraphrases);
  const auto sets = read_paraphrases(dir + "/para.jsonl");
  REQUIRE(sets.size() == 2);
  for (const auto& ps : sets) {
    for (const auto& p : ps.paraphrases)
      CHECK(p.normalized_tokens == ps.source.normalized_tokens);
    const FrequencyTable freq = maximal_frequency(ps);
    REQUIRE(freq.size() == 1);
    CHECK(freq.begin()->first == ps.source.normalized_tokens);
    CHECK(freq.begin()->second == 4);
  }

  // Lengths shorter than any derivation are unsatisfiable.
  SynthConfig bad;
  bad.corpus_size = 1;
  bad.min_len = 1;
  bad.max_len = 1;
  bad.max_rejections = 300;
  std::mt19937_64 brng(1);
  CHECK_THROWS_AS(synth_corpus(bad, brng), std::runtime_error);
  SynthConfig invalid;
  invalid.min_len = 6;
  invalid.max_len = 5;
  std::mt19937_64 vrng(1);
  CHECK_THROWS_AS(synth_corpus(invalid, vrng), std::invalid_argument);
}
