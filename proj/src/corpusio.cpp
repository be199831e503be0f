#include "seminfo/corpusio.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>
#include <stdexcept>
#include <unordered_set>

#include "json.hpp"

namespace seminfo {
namespace {

using nlohmann::json;

[[noreturn]] void fail_at(const std::string& path, std::size_t line,
                          const std::string& what) {
  throw std::runtime_error(path + ":" + std::to_string(line) + ": " + what);
}

std::ifstream open_for_read(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path + " for reading");
  return in;
}

std::ofstream open_for_write(const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  return out;
}

void finish_write(std::ofstream& out, const std::string& path) {
  out.flush();
  if (!out) throw std::runtime_error("write to " + path + " failed");
}

json parse_json_line(const std::string& path, std::size_t line,
                     const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    fail_at(path, line, std::string("malformed JSON (") + e.what() + ")");
  }
}

// Runs fn over every non-blank line with 1-based numbering.
template <typename Fn>
void for_each_line(const std::string& path, Fn&& fn) {
  std::ifstream in = open_for_read(path);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    fn(lineno, line);
  }
}

// Rejects duplicates, remembering ids across calls.
void claim_id(const std::string& path, std::size_t line,
              std::unordered_set<std::string>& seen, const std::string& id) {
  if (!seen.insert(id).second) fail_at(path, line, "duplicate id '" + id + "'");
}

// Logit arrays may hold -inf (forbidden rules); JSON numbers cannot, so
// non-finite values are stored as strings.
json logits_to_json(const std::vector<double>& v) {
  json out = json::array();
  for (double x : v) {
    if (std::isfinite(x))
      out.push_back(x);
    else if (std::isnan(x))
      out.push_back("nan");
    else
      out.push_back(x > 0 ? "inf" : "-inf");
  }
  return out;
}

std::vector<double> logits_from_json(const json& j, const std::string& ctx) {
  if (!j.is_array()) throw std::runtime_error(ctx + ": expected an array");
  std::vector<double> out;
  out.reserve(j.size());
  for (const json& e : j) {
    if (e.is_number()) {
      out.push_back(e.get<double>());
    } else if (e.is_string()) {
      const std::string s = e.get<std::string>();
      if (s == "inf")
        out.push_back(std::numeric_limits<double>::infinity());
      else if (s == "-inf")
        out.push_back(-std::numeric_limits<double>::infinity());
      else if (s == "nan")
        out.push_back(std::numeric_limits<double>::quiet_NaN());
      else
        throw std::runtime_error(ctx + ": bad numeric string '" + s + "'");
    } else {
      throw std::runtime_error(ctx + ": expected numbers");
    }
  }
  return out;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

// ---------------------------------------------------------------------------
// Corpus records
// ---------------------------------------------------------------------------

std::vector<CorpusRecord> read_corpus(const std::string& path,
                                      const NormalizationOptions& opts) {
  std::vector<CorpusRecord> out;
  std::unordered_set<std::string> seen;
  for_each_line(path, [&](std::size_t lineno, const std::string& line) {
    const json j = parse_json_line(path, lineno, line);
    CorpusRecord rec;
    try {
      rec.id = j.at("id").get<std::string>();
      rec.raw = j.at("text").get<std::string>();
    } catch (const json::exception& e) {
      fail_at(path, lineno, e.what());
    }
    claim_id(path, lineno, seen, rec.id);
    rec.normalized = normalize_text(rec.raw, opts);
    out.push_back(std::move(rec));
  });
  return out;
}

void write_corpus(const std::string& path,
                  const std::vector<CorpusRecord>& records) {
  std::ofstream out = open_for_write(path);
  for (const CorpusRecord& rec : records) {
    const json j = {{"id", rec.id}, {"text", rec.raw}};
    out << j.dump() << '\n';
  }
  finish_write(out, path);
}

// ---------------------------------------------------------------------------
// Paraphrase files
// ---------------------------------------------------------------------------

std::vector<RawParaphraseRecord> read_paraphrase_records(
    const std::string& path) {
  std::vector<RawParaphraseRecord> out;
  std::unordered_set<std::string> seen;
  for_each_line(path, [&](std::size_t lineno, const std::string& line) {
    const json j = parse_json_line(path, lineno, line);
    RawParaphraseRecord rec;
    try {
      rec.id = j.at("id").get<std::string>();
      rec.source = j.at("source").get<std::string>();
      for (const json& p : j.at("paraphrases"))
        rec.paraphrases.push_back(p.get<std::string>());
      if (j.contains("error")) rec.error = j.at("error").get<std::string>();
    } catch (const json::exception& e) {
      fail_at(path, lineno, e.what());
    }
    claim_id(path, lineno, seen, rec.id);
    out.push_back(std::move(rec));
  });
  return out;
}

void write_paraphrase_records(const std::string& path,
                              const std::vector<RawParaphraseRecord>& records) {
  std::ofstream out = open_for_write(path);
  for (const RawParaphraseRecord& rec : records) {
    json j = {{"id", rec.id},
              {"source", rec.source},
              {"paraphrases", rec.paraphrases}};
    if (!rec.error.empty()) j["error"] = rec.error;
    out << j.dump() << '\n';
  }
  finish_write(out, path);
}

std::vector<ParaphraseSet> read_paraphrases(const std::string& path,
                                            const NormalizationOptions& opts) {
  std::vector<ParaphraseSet> out;
  std::unordered_set<std::string> seen;
  for_each_line(path, [&](std::size_t lineno, const std::string& line) {
    const json j = parse_json_line(path, lineno, line);
    ParaphraseSet ps;
    std::vector<std::string> raw_paraphrases;
    try {
      ps.id = j.at("id").get<std::string>();
      ps.source = normalize_text(j.at("source").get<std::string>(), opts);
      for (const json& p : j.at("paraphrases"))
        raw_paraphrases.push_back(p.get<std::string>());
    } catch (const json::exception& e) {
      fail_at(path, lineno, e.what());
    }
    claim_id(path, lineno, seen, ps.id);
    if (ps.source.normalized_tokens.empty())
      fail_at(path, lineno, "source normalizes to zero tokens");
    for (const std::string& p : raw_paraphrases)
      ps.paraphrases.push_back(normalize_text(p, opts));
    out.push_back(std::move(ps));
  });
  return out;
}

// ---------------------------------------------------------------------------
// Tree files
// ---------------------------------------------------------------------------

std::vector<TreeRecord> read_trees_jsonl(const std::string& path) {
  std::vector<TreeRecord> out;
  std::unordered_set<std::string> seen;
  for_each_line(path, [&](std::size_t lineno, const std::string& line) {
    const json j = parse_json_line(path, lineno, line);
    TreeRecord rec;
    std::uint32_t n = 0;
    std::vector<Span> spans;
    try {
      rec.id = j.at("id").get<std::string>();
      n = j.at("n").get<std::uint32_t>();
      for (const json& s : j.at("spans")) {
        if (!s.is_array() || s.size() != 2)
          throw std::runtime_error("span entries must be [i, j] pairs");
        spans.push_back(
            {s.at(0).get<std::uint32_t>(), s.at(1).get<std::uint32_t>()});
      }
    } catch (const json::exception& e) {
      fail_at(path, lineno, e.what());
    } catch (const std::runtime_error& e) {
      fail_at(path, lineno, e.what());
    }
    claim_id(path, lineno, seen, rec.id);
    rec.tree = tree_from_internal_spans(n, spans);
    if (!is_valid_tree(rec.tree))
      fail_at(path, lineno, "spans do not form a binary bracketing");
    out.push_back(std::move(rec));
  });
  return out;
}

void write_trees_jsonl(const std::string& path,
                       const std::vector<TreeRecord>& records) {
  std::ofstream out = open_for_write(path);
  for (const TreeRecord& rec : records) {
    json spans = json::array();
    for (const Span& s : internal_spans(rec.tree))
      spans.push_back({s.i, s.j});
    const json j = {{"id", rec.id}, {"n", rec.tree.n}, {"spans", spans}};
    out << j.dump() << '\n';
  }
  finish_write(out, path);
}

namespace {

// Recursive-descent bracket reader over one line.
struct BracketParser {
  const std::string& path;
  std::size_t lineno;
  const std::string& text;
  std::size_t pos = 0;
  std::uint32_t next_leaf = 0;
  GoldTree gold;

  [[noreturn]] void fail(const std::string& what) const {
    throw std::runtime_error(path + ":" + std::to_string(lineno) + ":" +
                             std::to_string(pos + 1) + ": " + what);
  }

  void skip_spaces() {
    while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos])))
      ++pos;
  }

  std::string read_word(const char* what) {
    const std::size_t start = pos;
    while (pos < text.size() && !std::isspace(static_cast<unsigned char>(text[pos])) &&
           text[pos] != '(' && text[pos] != ')')
      ++pos;
    if (pos == start) fail(std::string("expected ") + what);
    return text.substr(start, pos - start);
  }

  // Returns the node's span; appends labeled spans for non-preterminals.
  Span parse_node(bool is_root) {
    skip_spaces();
    if (pos >= text.size() || text[pos] != '(') fail("expected '('");
    ++pos;
    skip_spaces();
    const std::string label = read_word("a node label");
    skip_spaces();
    if (pos >= text.size()) fail("unbalanced parentheses");

    Span span{next_leaf, next_leaf};
    bool preterminal = false;
    if (text[pos] == '(') {
      while (true) {
        const Span child = parse_node(false);
        span.j = child.j;
        skip_spaces();
        if (pos >= text.size()) fail("unbalanced parentheses");
        if (text[pos] == ')') break;
        if (text[pos] != '(') fail("unexpected token after child nodes");
      }
    } else if (text[pos] == ')') {
      fail("node without children");
    } else {
      read_word("a leaf token");
      span.j = ++next_leaf;
      preterminal = true;
      skip_spaces();
      if (pos >= text.size()) fail("unbalanced parentheses");
      if (text[pos] != ')') fail("leaves hold exactly one token");
    }
    ++pos;  // consume ')'
    if (!preterminal || is_root)
      gold.labeled_spans.insert({span, label});
    return span;
  }

  GoldTree run() {
    skip_spaces();
    const Span root = parse_node(true);
    skip_spaces();
    if (pos < text.size()) fail("trailing content after the tree");
    gold.n = root.j;
    return gold;
  }
};

void check_laminar(const GoldTree& gold) {
  std::vector<Span> spans;
  for (const LabeledSpan& ls : gold.labeled_spans) {
    if (ls.span.i >= ls.span.j || ls.span.j > gold.n)
      throw std::invalid_argument("gold span out of bounds");
    if (spans.empty() || spans.back() != ls.span) spans.push_back(ls.span);
  }
  for (std::size_t a = 0; a < spans.size(); ++a)
    for (std::size_t b = a + 1; b < spans.size(); ++b) {
      const Span &s = spans[a], &t = spans[b];
      const bool disjoint = s.j <= t.i || t.j <= s.i;
      const bool nested = (s.i <= t.i && t.j <= s.j) || (t.i <= s.i && s.j <= t.j);
      if (!disjoint && !nested)
        throw std::invalid_argument("gold spans cross");
    }
}

}  // namespace

std::vector<GoldTree> read_bracketed(const std::string& path) {
  std::vector<GoldTree> out;
  for_each_line(path, [&](std::size_t lineno, const std::string& line) {
    BracketParser parser{path, lineno, line};
    out.push_back(parser.run());
  });
  return out;
}

std::string gold_to_brackets(const GoldTree& gold,
                             const std::vector<std::string>& tokens) {
  if (tokens.size() != gold.n)
    throw std::invalid_argument("gold_to_brackets: token count mismatch");
  if (gold.n == 0) throw std::invalid_argument("gold_to_brackets: empty tree");
  check_laminar(gold);

  std::map<Span, std::vector<std::string>> labels;
  for (const LabeledSpan& ls : gold.labeled_spans)
    labels[ls.span].push_back(ls.label);
  if (!labels.count({0, gold.n}))
    throw std::invalid_argument("gold_to_brackets: no root span");

  // Emits the cover of [i, j) as child nodes and bare tokens; `self` marks
  // the span whose own labels were already opened.
  auto emit = [&](auto&& self, std::uint32_t i, std::uint32_t j,
                  bool skip_own) -> std::string {
    if (!skip_own) {
      const auto it = labels.find({i, j});
      if (it != labels.end()) {
        std::string out;
        for (const std::string& l : it->second) out += "(" + l + " ";
        out += self(self, i, j, true);
        out.append(it->second.size(), ')');
        return out;
      }
    }
    if (j - i == 1) return "(X " + tokens[i] + ")";
    std::string out;
    std::uint32_t p = i;
    while (p < j) {
      // Longest labeled span starting at p inside [i, j), excluding (i, j).
      std::uint32_t best = 0;
      for (auto it = labels.lower_bound({p, 0});
           it != labels.end() && it->first.i == p; ++it)
        if (it->first.j <= j && !(p == i && it->first.j == j))
          best = std::max(best, it->first.j);
      if (!out.empty()) out += ' ';
      if (best > p) {
        out += self(self, p, best, false);
        p = best;
      } else {
        out += "(X " + tokens[p] + ")";
        ++p;
      }
    }
    return out;
  };
  return emit(emit, 0, gold.n, false);
}

std::string tree_to_brackets(const ConstituentTree& tree,
                             const std::vector<std::string>& tokens) {
  if (!is_valid_tree(tree))
    throw std::invalid_argument("tree_to_brackets: not a binary bracketing");
  GoldTree gold;
  gold.n = tree.n;
  for (const Span& s : internal_spans(tree))
    gold.labeled_spans.insert({s, "X"});
  if (tree.n == 1) gold.labeled_spans.insert({{0, 1}, "X"});
  return gold_to_brackets(gold, tokens);
}

void write_bracketed(const std::string& path,
                     const std::vector<GoldTree>& golds,
                     const std::vector<std::vector<std::string>>& tokens) {
  if (golds.size() != tokens.size())
    throw std::invalid_argument("write_bracketed: corpus sizes disagree");
  std::ofstream out = open_for_write(path);
  for (std::size_t i = 0; i < golds.size(); ++i)
    out << gold_to_brackets(golds[i], tokens[i]) << '\n';
  finish_write(out, path);
}

// ---------------------------------------------------------------------------
// Score files
// ---------------------------------------------------------------------------

std::vector<SpanScoreTable> read_scores(const std::string& path) {
  std::vector<SpanScoreTable> out;
  std::unordered_set<std::string> seen;
  for_each_line(path, [&](std::size_t lineno, const std::string& line) {
    const json j = parse_json_line(path, lineno, line);
    SpanScoreTable table;
    try {
      table.id = j.at("id").get<std::string>();
      table.n = j.at("n").get<std::uint32_t>();
      for (const json& s : j.at("spans")) {
        if (!s.is_array() || s.size() != 3)
          throw std::runtime_error("span entries must be [i, j, score]");
        const auto i = s.at(0).get<std::uint32_t>();
        const auto k = s.at(1).get<std::uint32_t>();
        const double v = s.at(2).get<double>();
        if (k - i < 2 || k > table.n || k - i > table.n - 1)
          throw std::runtime_error("span outside 2 <= j-i <= n-1");
        if (!(v >= 0) || !std::isfinite(v))
          throw std::runtime_error("scores must be finite and >= 0");
        if (!table.scores.emplace(Span{i, k}, v).second)
          throw std::runtime_error("duplicate span");
      }
    } catch (const json::exception& e) {
      fail_at(path, lineno, e.what());
    } catch (const std::runtime_error& e) {
      fail_at(path, lineno, e.what());
    }
    claim_id(path, lineno, seen, table.id);
    out.push_back(std::move(table));
  });
  return out;
}

void write_scores(const std::string& path,
                  const std::vector<SpanScoreTable>& tables) {
  std::ofstream out = open_for_write(path);
  for (const SpanScoreTable& table : tables) {
    json spans = json::array();
    for (const auto& [s, v] : table.scores) spans.push_back({s.i, s.j, v});
    const json j = {{"id", table.id}, {"n", table.n}, {"spans", spans}};
    out << j.dump() << '\n';
  }
  finish_write(out, path);
}

// ---------------------------------------------------------------------------
// Checkpoints
// ---------------------------------------------------------------------------

namespace {
constexpr int kCheckpointVersion = 1;
constexpr const char* kCheckpointFormat = "seminfo-checkpoint";
}  // namespace

void write_checkpoint(const std::string& path, const Checkpoint& c) {
  const int nt = c.grammar.num_nonterminals;
  const int vs = c.grammar.vocab_size();
  std::vector<std::string> vocab(vs);
  for (const auto& [word, idx] : c.grammar.terminal_vocab) {
    if (idx < 0 || idx >= vs || !vocab[idx].empty())
      throw std::invalid_argument("write_checkpoint: malformed vocabulary");
    vocab[idx] = word;
  }
  json j;
  j["format"] = kCheckpointFormat;
  j["version"] = kCheckpointVersion;
  j["step"] = c.step;
  j["grammar"] = {{"num_nonterminals", nt},
                  {"start", c.grammar.start},
                  {"vocab", vocab},
                  {"binary_logits", logits_to_json(c.grammar.binary_logits)},
                  {"lexical_logits", logits_to_json(c.grammar.lexical_logits)}};
  j["adam"] = {{"t", c.adam.t},
               {"m_binary", logits_to_json(c.adam.m_binary)},
               {"v_binary", logits_to_json(c.adam.v_binary)},
               {"m_lexical", logits_to_json(c.adam.m_lexical)},
               {"v_lexical", logits_to_json(c.adam.v_lexical)}};
  j["reward_sum"] = c.reward_sum;
  j["reward_count"] = c.reward_count;
  j["rng"] = c.rng_state;

  std::ofstream out = open_for_write(path);
  out << j.dump(2) << '\n';
  finish_write(out, path);
}

Checkpoint read_checkpoint(const std::string& path) {
  std::ifstream in = open_for_read(path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw std::runtime_error(path + ": malformed JSON (" + e.what() + ")");
  }
  Checkpoint c;
  try {
    if (j.at("format").get<std::string>() != kCheckpointFormat)
      throw std::runtime_error("not a checkpoint file");
    if (j.at("version").get<int>() != kCheckpointVersion)
      throw std::runtime_error("unsupported checkpoint version");
    c.step = j.at("step").get<std::int64_t>();
    const json& g = j.at("grammar");
    c.grammar.num_nonterminals = g.at("num_nonterminals").get<int>();
    c.grammar.start = g.at("start").get<int>();
    const auto vocab = g.at("vocab").get<std::vector<std::string>>();
    for (std::size_t i = 0; i < vocab.size(); ++i)
      c.grammar.terminal_vocab[vocab[i]] = static_cast<int>(i);
    if (c.grammar.terminal_vocab.size() != vocab.size())
      throw std::runtime_error("duplicate vocabulary entries");
    c.grammar.binary_logits =
        logits_from_json(g.at("binary_logits"), "binary_logits");
    c.grammar.lexical_logits =
        logits_from_json(g.at("lexical_logits"), "lexical_logits");
    const json& a = j.at("adam");
    c.adam.t = a.at("t").get<std::int64_t>();
    c.adam.m_binary = logits_from_json(a.at("m_binary"), "m_binary");
    c.adam.v_binary = logits_from_json(a.at("v_binary"), "v_binary");
    c.adam.m_lexical = logits_from_json(a.at("m_lexical"), "m_lexical");
    c.adam.v_lexical = logits_from_json(a.at("v_lexical"), "v_lexical");
    c.reward_sum = j.at("reward_sum").get<double>();
    c.reward_count = j.at("reward_count").get<std::int64_t>();
    c.rng_state = j.at("rng").get<std::string>();
  } catch (const json::exception& e) {
    throw std::runtime_error(path + ": " + e.what());
  } catch (const std::runtime_error& e) {
    throw std::runtime_error(path + ": " + e.what());
  }

  const std::size_t nt = static_cast<std::size_t>(c.grammar.num_nonterminals);
  const std::size_t vs = c.grammar.terminal_vocab.size();
  const std::size_t nb = nt * nt * nt, nl = nt * vs;
  if (c.grammar.num_nonterminals <= 0 || vs == 0 ||
      c.grammar.binary_logits.size() != nb ||
      c.grammar.lexical_logits.size() != nl ||
      c.grammar.start < 0 || c.grammar.start >= c.grammar.num_nonterminals ||
      c.adam.m_binary.size() != nb || c.adam.v_binary.size() != nb ||
      c.adam.m_lexical.size() != nl || c.adam.v_lexical.size() != nl)
    throw std::runtime_error(path + ": inconsistent checkpoint dimensions");
  return c;
}

// ---------------------------------------------------------------------------
// Config files
// ---------------------------------------------------------------------------

namespace {

[[noreturn]] void config_fail(std::size_t line, const std::string& what) {
  throw std::runtime_error("line " + std::to_string(line) + ": " + what);
}

double parse_double_value(std::size_t line, const std::string& v) {
  std::size_t used = 0;
  double out = 0;
  try {
    out = std::stod(v, &used);
  } catch (const std::exception&) {
    config_fail(line, "expected a number, got '" + v + "'");
  }
  if (used != v.size()) config_fail(line, "trailing characters in '" + v + "'");
  return out;
}

long long parse_int_value(std::size_t line, const std::string& v) {
  std::size_t used = 0;
  long long out = 0;
  try {
    out = std::stoll(v, &used);
  } catch (const std::exception&) {
    config_fail(line, "expected an integer, got '" + v + "'");
  }
  if (used != v.size()) config_fail(line, "trailing characters in '" + v + "'");
  return out;
}

std::uint64_t parse_seed_value(std::size_t line, const std::string& v) {
  std::size_t used = 0;
  std::uint64_t out = 0;
  try {
    out = std::stoull(v, &used);
  } catch (const std::exception&) {
    config_fail(line, "expected an unsigned integer, got '" + v + "'");
  }
  if (used != v.size()) config_fail(line, "trailing characters in '" + v + "'");
  return out;
}

}  // namespace

TrainingConfig parse_config_text(const std::string& text,
                                 const TrainingConfig& base) {
  TrainingConfig cfg = base;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) config_fail(lineno, "expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));
    if (key.empty() || val.empty()) config_fail(lineno, "expected key = value");
    try {
      if (key == "policy")
        cfg.policy = policy_from_string(val);
      else if (key == "samples_per_sentence")
        cfg.samples_per_sentence = static_cast<int>(parse_int_value(lineno, val));
      else if (key == "entropy_coef")
        cfg.entropy_coef = parse_double_value(lineno, val);
      else if (key == "entropy_placement")
        cfg.entropy_placement = placement_from_string(val);
      else if (key == "ll_weight")
        cfg.ll_weight = parse_double_value(lineno, val);
      else if (key == "learning_rate")
        cfg.learning_rate = parse_double_value(lineno, val);
      else if (key == "batch_size")
        cfg.batch_size = static_cast<int>(parse_int_value(lineno, val));
      else if (key == "max_steps")
        cfg.max_steps = static_cast<int>(parse_int_value(lineno, val));
      else if (key == "seed")
        cfg.seed = parse_seed_value(lineno, val);
      else if (key == "clip_norm")
        cfg.clip_norm = parse_double_value(lineno, val);
      else
        config_fail(lineno, "unknown key '" + key + "'");
    } catch (const std::invalid_argument& e) {
      config_fail(lineno, e.what());
    }
  }
  validate_config(cfg);
  return cfg;
}

TrainingConfig read_training_config(const std::string& path,
                                    const TrainingConfig& base) {
  std::ifstream in = open_for_read(path);
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    return parse_config_text(buf.str(), base);
  } catch (const std::runtime_error& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
}

// ---------------------------------------------------------------------------
// Prompt templates
// ---------------------------------------------------------------------------

const std::vector<PromptTemplate>& default_prompt_templates() {
  static const std::vector<PromptTemplate> kTemplates = {
      {"reorder-phrases",
       "Rewrite the following {lang} sentence by reordering its phrases while "
       "keeping every word and the meaning unchanged. Give each rewrite on "
       "its own line."},
      {"shuffle-grammatical",
       "Create grammatical {lang} sentences by shuffling the words of the "
       "sentence below without changing what it says. One sentence per "
       "line."},
      {"front-adjunct",
       "Move an adverbial or prepositional phrase of this {lang} sentence to "
       "the front without changing the meaning. One variant per line."},
      {"voice-switch",
       "Rewrite this {lang} sentence switching between active and passive "
       "voice where the meaning allows. One rewrite per line."},
      {"topicalize",
       "Topicalize a constituent of the following {lang} sentence, keeping "
       "the meaning intact. One rewrite per line."},
      {"cleft",
       "Rephrase this {lang} sentence as cleft constructions that preserve "
       "its meaning. One rewrite per line."},
      {"same-words",
       "Produce {lang} word-order variants of this sentence that reuse "
       "exactly the same words and preserve the meaning. One per line."},
      {"swap-clauses",
       "Swap the order of clauses or conjuncts in this {lang} sentence when "
       "the meaning allows. One rewrite per line."},
      {"plain-paraphrase",
       "Paraphrase the following {lang} sentence without adding or removing "
       "information. One paraphrase per line."},
  };
  return kTemplates;
}

std::string render_template(const PromptTemplate& t, const std::string& lang) {
  if (t.text.empty())
    throw std::invalid_argument("render_template: empty template");
  std::string out = t.text;
  const std::string key = "{lang}";
  std::size_t pos = 0;
  while ((pos = out.find(key, pos)) != std::string::npos) {
    out.replace(pos, key.size(), lang);
    pos += lang.size();
  }
  return out;
}

// ---------------------------------------------------------------------------
// Synthetic corpus generator
// ---------------------------------------------------------------------------

namespace {

// Hand-written CNF generator: every rule is either NT -> NT NT or NT -> word.
struct GenRule {
  double w;
  int left = -1, right = -1;  // binary when left >= 0
  int word = -1;              // emission otherwise
};

struct GenGrammar {
  std::vector<std::string> nt_names;
  std::vector<std::string> words;
  std::vector<std::vector<GenRule>> rules;  // weights sum to 1 per NT
};

const GenGrammar& synth_grammar() {
  static const GenGrammar kGrammar = [] {
    GenGrammar g;
    g.nt_names = {"S", "NP", "VP", "PP", "DT", "NN", "VB", "IN"};
    enum { S, NP, VP, PP, DT, NN, VB, IN };
    const std::vector<std::string> dets = {"the", "a", "every", "some"};
    const std::vector<std::string> nouns = {
        "dog",  "cat",  "man",   "woman", "bird",      "fish",
        "park", "tree", "house", "car",   "telescope", "river"};
    const std::vector<std::string> verbs = {"saw",   "fed",      "chased",
                                            "heard", "walked",   "liked",
                                            "followed", "watched"};
    const std::vector<std::string> intrans = {"barked", "slept", "ran",
                                              "smiled"};
    const std::vector<std::string> preps = {"in", "with", "near", "under",
                                            "behind"};
    auto add_words = [&](const std::vector<std::string>& ws) {
      std::vector<int> ids;
      for (const std::string& w : ws) {
        ids.push_back(static_cast<int>(g.words.size()));
        g.words.push_back(w);
      }
      return ids;
    };
    const auto det_ids = add_words(dets);
    const auto noun_ids = add_words(nouns);
    const auto verb_ids = add_words(verbs);
    const auto intrans_ids = add_words(intrans);
    const auto prep_ids = add_words(preps);

    g.rules.resize(g.nt_names.size());
    auto binary = [&](int a, double w, int b, int c) {
      g.rules[a].push_back({w, b, c, -1});
    };
    auto emit_uniform = [&](int a, double total, const std::vector<int>& ws) {
      for (int w : ws) g.rules[a].push_back({total / ws.size(), -1, -1, w});
    };
    // Homographs (a noun surface usable as a verb and vice versa) and bare
    // nominal NPs make the bracketing ambiguous under pure likelihood, while
    // the paraphrase transforms still expose the gold constituents.
    auto plus = [](std::vector<int> base, const std::vector<int>& extra) {
      base.insert(base.end(), extra.begin(), extra.end());
      return base;
    };
    const auto nn_emits =
        plus(noun_ids, {verb_ids[0], verb_ids[4], verb_ids[7]});
    const auto vb_emits =
        plus(verb_ids, {noun_ids[5], noun_ids[6], noun_ids[8]});

    binary(S, 1.0, NP, VP);
    binary(NP, 0.55, DT, NN);
    binary(NP, 0.3, NP, PP);
    emit_uniform(NP, 0.15, noun_ids);  // bare nominals
    binary(VP, 0.35, VB, NP);
    binary(VP, 0.3, VP, PP);
    emit_uniform(VP, 0.35, intrans_ids);
    binary(PP, 1.0, IN, NP);
    emit_uniform(DT, 1.0, det_ids);
    binary(NN, 0.1, NN, NN);  // noun compounds make every length >= 2 reachable
    emit_uniform(NN, 0.9, nn_emits);
    emit_uniform(VB, 1.0, vb_emits);
    emit_uniform(IN, 1.0, prep_ids);
    return g;
  }();
  return kGrammar;
}

Grammar materialize_grammar(const GenGrammar& gen) {
  Grammar g;
  g.num_nonterminals = static_cast<int>(gen.nt_names.size());
  g.terminal_vocab[kUnkToken] = 0;
  for (std::size_t i = 0; i < gen.words.size(); ++i)
    g.terminal_vocab[gen.words[i]] = static_cast<int>(i) + 1;
  const double ninf = -std::numeric_limits<double>::infinity();
  g.binary_logits.assign(static_cast<std::size_t>(g.num_nonterminals) *
                             g.num_nonterminals * g.num_nonterminals,
                         ninf);
  g.lexical_logits.assign(
      static_cast<std::size_t>(g.num_nonterminals) * g.vocab_size(), ninf);
  for (std::size_t a = 0; a < gen.rules.size(); ++a)
    for (const GenRule& r : gen.rules[a]) {
      const int ai = static_cast<int>(a);
      if (r.left >= 0)
        g.binary_logit(ai, r.left, r.right) = std::log(r.w);
      else
        g.lexical_logit(ai, r.word + 1) = std::log(r.w);
    }
  return g;
}

struct SynthNode {
  int nt = 0;
  int word = -1;  // emission when >= 0
  int l = -1, r = -1;
};

// Samples a derivation of `a`; returns the node index, or -1 once the token
// budget is exceeded (the attempt is then rejected).
int sample_node(const GenGrammar& gen, int a, std::uint32_t max_len,
                std::vector<SynthNode>& pool, std::uint32_t& count,
                std::mt19937_64& rng) {
  if (count > max_len) return -1;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double pick = u(rng);
  const GenRule* chosen = &gen.rules[a].back();
  for (const GenRule& r : gen.rules[a]) {
    pick -= r.w;
    if (pick <= 0) {
      chosen = &r;
      break;
    }
  }
  const int idx = static_cast<int>(pool.size());
  pool.push_back({a, chosen->word, -1, -1});
  if (chosen->word >= 0) {
    ++count;
    if (count > max_len) return -1;
    return idx;
  }
  const int l = sample_node(gen, chosen->left, max_len, pool, count, rng);
  if (l < 0) return -1;
  const int r = sample_node(gen, chosen->right, max_len, pool, count, rng);
  if (r < 0) return -1;
  pool[idx].l = l;
  pool[idx].r = r;
  return idx;
}

void linearize(const std::vector<SynthNode>& pool, int idx, int skip,
               std::vector<int>& out) {
  if (idx < 0 || idx == skip) return;
  const SynthNode& node = pool[idx];
  if (node.word >= 0) {
    out.push_back(node.word);
    return;
  }
  linearize(pool, node.l, skip, out);
  linearize(pool, node.r, skip, out);
}

// Labeled spans for every binary node (emissions are single tokens and add
// no bracketing information).
void collect_gold(const GenGrammar& gen, const std::vector<SynthNode>& pool,
                  int idx, std::uint32_t& leaf, GoldTree& gold) {
  const SynthNode& node = pool[idx];
  if (node.word >= 0) {
    ++leaf;
    return;
  }
  const std::uint32_t start = leaf;
  collect_gold(gen, pool, node.l, leaf, gold);
  collect_gold(gen, pool, node.r, leaf, gold);
  gold.labeled_spans.insert({{start, leaf}, gen.nt_names[node.nt]});
}

std::string join_words(const GenGrammar& gen, const std::vector<int>& ids) {
  std::string out;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (i) out += ' ';
    out += gen.words[ids[i]];
  }
  return out;
}

}  // namespace

SynthOutput synth_corpus(const SynthConfig& cfg, std::mt19937_64& rng) {
  if (cfg.corpus_size < 0 || cfg.paraphrases_per_sentence < 0 ||
      cfg.min_len == 0 || cfg.min_len > cfg.max_len || cfg.max_rejections < 1 ||
      cfg.swap_prob < 0 || cfg.swap_prob > 1 || cfg.front_prob < 0 ||
      cfg.front_prob > 1)
    throw std::invalid_argument("synth_corpus: bad configuration");
  const GenGrammar& gen = synth_grammar();
  SynthOutput out;
  out.gold_grammar = materialize_grammar(gen);
  std::uniform_real_distribution<double> u(0.0, 1.0);

  for (int s = 0; s < cfg.corpus_size; ++s) {
    std::vector<SynthNode> pool;
    int root = -1;
    for (int attempt = 0;; ++attempt) {
      if (attempt >= cfg.max_rejections)
        throw std::runtime_error("synth_corpus: unsatisfiable sentence-length cap");
      pool.clear();
      std::uint32_t count = 0;
      root = sample_node(gen, 0, cfg.max_len, pool, count, rng);
      if (root >= 0 && count >= cfg.min_len && count <= cfg.max_len) break;
    }
    std::vector<int> token_ids;
    linearize(pool, root, -1, token_ids);

    char id[16];
    std::snprintf(id, sizeof id, "s%05d", s + 1);
    CorpusRecord rec;
    rec.id = id;
    rec.raw = join_words(gen, token_ids);
    rec.normalized = normalize_text(rec.raw);
    out.corpus.push_back(std::move(rec));

    GoldTree gold;
    gold.n = static_cast<std::uint32_t>(token_ids.size());
    std::uint32_t leaf = 0;
    collect_gold(gen, pool, root, leaf, gold);
    out.gold.push_back(std::move(gold));

    RawParaphraseRecord pr;
    pr.id = id;
    pr.source = out.corpus.back().raw;
    for (int k = 0; k < cfg.paraphrases_per_sentence; ++k) {
      if (cfg.identity_only) {
        pr.paraphrases.push_back(pr.source);
        continue;
      }
      std::vector<SynthNode> copy = pool;
      for (SynthNode& node : copy)
        if (node.word < 0 && u(rng) < cfg.swap_prob) std::swap(node.l, node.r);
      std::vector<int> para_ids;
      if (cfg.front_prob > 0 && u(rng) < cfg.front_prob && copy.size() > 1) {
        // Front one non-root constituent: its yield, then the rest in order.
        std::vector<int> candidates;
        for (int idx = 0; idx < static_cast<int>(copy.size()); ++idx)
          if (idx != root) candidates.push_back(idx);
        const int pick =
            candidates[static_cast<std::size_t>(rng() % candidates.size())];
        linearize(copy, pick, -1, para_ids);
        linearize(copy, root, pick, para_ids);
      } else {
        linearize(copy, root, -1, para_ids);
      }
      pr.paraphrases.push_back(join_words(gen, para_ids));
    }
    out.paraphrases.push_back(std::move(pr));
  }
  return out;
}

}  // namespace seminfo
