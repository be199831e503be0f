#include <chrono>
#include <cstdlib>
#include <fstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <unordered_set>
#include <vector>

#include "httplib.h"
#include "json.hpp"
#include "seminfo/corpusio.hpp"

namespace seminfo {
namespace {

using nlohmann::json;

std::vector<std::string> split_lines_trimmed(const std::string& text) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string::npos) end = text.size();
    std::string line = text.substr(start, end - start);
    const auto b = line.find_first_not_of(" \t\r");
    if (b != std::string::npos) {
      const auto e = line.find_last_not_of(" \t\r");
      out.push_back(line.substr(b, e - b + 1));
    }
    start = end + 1;
  }
  return out;
}

std::unordered_set<std::string> read_journal(const std::string& path) {
  std::unordered_set<std::string> done;
  std::ifstream in(path, std::ios::binary);
  std::string line;
  while (in && std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) done.insert(line);
  }
  return done;
}

struct RequestResult {
  bool ok = false;
  bool hard_abort = false;
  std::string error;
  std::vector<std::string> paraphrases;
};

RequestResult request_one(httplib::Client& cli, const FetchConfig& cfg,
                          const httplib::Headers& headers,
                          const std::string& prompt,
                          const std::string& sentence) {
  const json body = {
      {"model", cfg.model},
      {"n", cfg.samples_per_prompt},
      {"messages",
       {{{"role", "user"}, {"content", prompt + "\n\n" + sentence}}}}};
  const std::string payload = body.dump();

  RequestResult out;
  int backoff_ms = cfg.backoff_initial_ms;
  for (int attempt = 0; attempt <= cfg.max_retries; ++attempt) {
    if (attempt > 0) {
      std::this_thread::sleep_for(std::chrono::milliseconds(backoff_ms));
      backoff_ms *= 2;
    }
    httplib::Result res =
        cli.Post(cfg.path, headers, payload, "application/json");
    if (!res) {
      out.error = "transport error (" + httplib::to_string(res.error()) + ")";
      continue;  // retry
    }
    if (res->status == 200) {
      try {
        const json reply = json::parse(res->body);
        for (const json& choice : reply.at("choices"))
          for (std::string& line : split_lines_trimmed(
                   choice.at("message").at("content").get<std::string>()))
            out.paraphrases.push_back(std::move(line));
      } catch (const json::exception& e) {
        out.error = std::string("malformed response (") + e.what() + ")";
        return out;
      }
      out.ok = true;
      out.error.clear();
      return out;
    }
    out.error = "HTTP " + std::to_string(res->status);
    if (res->status == 402) {  // hard quota: stop the whole run
      out.hard_abort = true;
      return out;
    }
    if (res->status == 429 || res->status >= 500) continue;  // retryable
    return out;  // other 4xx: no point retrying
  }
  return out;
}

}  // namespace

FetchOutcome fetch_paraphrases(const FetchConfig& cfg,
                               const std::vector<CorpusRecord>& sentences,
                               const std::string& out_path,
                               const std::string& progress_path) {
  if (cfg.endpoint.empty())
    throw std::invalid_argument("fetch_paraphrases: empty endpoint");
  if (cfg.samples_per_prompt < 1 || cfg.max_retries < 0 || cfg.concurrency < 1)
    throw std::invalid_argument("fetch_paraphrases: bad configuration");
  std::vector<PromptTemplate> templates = cfg.templates;
  if (templates.empty()) {
    const auto& defaults = default_prompt_templates();
    templates.assign(defaults.begin(), defaults.begin() + 8);
  }

  const std::unordered_set<std::string> done = read_journal(progress_path);
  std::ofstream out(out_path, std::ios::binary | std::ios::app);
  if (!out)
    throw std::runtime_error("cannot open " + out_path + " for writing");
  std::ofstream journal(progress_path, std::ios::binary | std::ios::app);
  if (!journal)
    throw std::runtime_error("cannot open " + progress_path + " for writing");

  httplib::Client cli(cfg.endpoint);
  cli.set_connection_timeout(cfg.timeout_s, 0);
  cli.set_read_timeout(cfg.timeout_s, 0);
  httplib::Headers headers;
  if (const char* key = std::getenv("SEMINFO_API_KEY"))
    headers.emplace("Authorization", std::string("Bearer ") + key);

  FetchOutcome outcome;
  for (const CorpusRecord& sentence : sentences) {
    if (done.count(sentence.id)) {
      ++outcome.skipped;
      continue;
    }
    RawParaphraseRecord rec;
    rec.id = sentence.id;
    rec.source = sentence.raw;
    for (const PromptTemplate& t : templates) {
      const RequestResult res = request_one(
          cli, cfg, headers, render_template(t, cfg.lang), sentence.raw);
      if (res.hard_abort) {
        // Nothing journaled for this sentence; a rerun picks it up again.
        outcome.aborted = true;
        return outcome;
      }
      if (!res.ok) {
        rec.error = t.name + ": " + res.error;
        rec.paraphrases.clear();
        break;
      }
      rec.paraphrases.insert(rec.paraphrases.end(), res.paraphrases.begin(),
                             res.paraphrases.end());
    }
    json j = {{"id", rec.id},
              {"source", rec.source},
              {"paraphrases", rec.paraphrases}};
    if (!rec.error.empty()) j["error"] = rec.error;
    out << j.dump() << '\n';
    out.flush();
    journal << rec.id << '\n';
    journal.flush();
    if (!out || !journal)
      throw std::runtime_error("fetch_paraphrases: write failed");
    rec.error.empty() ? ++outcome.completed : ++outcome.failed;
  }
  return outcome;
}

}  // namespace seminfo
