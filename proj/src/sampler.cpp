// Copyright 2026 The QA-SNNE Toolkit Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "qasnne/sampler.hpp"

#include <atomic>
#include <condition_variable>
#include <fstream>
#include <map>
#include <mutex>
#include <thread>
#include <unordered_set>

#include "http_util.hpp"
#include "httplib.h"
#include "qasnne/text_normalize.hpp"

namespace qasnne {
namespace {

struct RequestFailure {
  std::string message;
  bool retryable = true;
};

class ChatEndpoint {
 public:
  ChatEndpoint(const SamplingJob& job)
      : url_(detail::split_url(job.generation.endpoint_url)),
        client_(url_.origin),
        retry_(job.retry) {
    client_.set_connection_timeout(job.timeout);
    client_.set_read_timeout(job.timeout);
    if (!job.api_key.empty()) client_.set_bearer_token_auth(job.api_key);
  }

  // Returns the normalized message contents of every choice. Throws
  // BackendError once retries are exhausted.
  std::vector<std::string> complete(const Json& body, RecordSummary& rs,
                                    std::atomic<std::size_t>& sent,
                                    std::atomic<std::size_t>& ok) {
    std::string last_error;
    for (int attempt = 1; attempt <= retry_.max_attempts; ++attempt) {
      ++rs.requests;
      ++sent;
      rs.attempts = std::max(rs.attempts, attempt);
      try {
        auto choices = once(body);
        ++ok;
        return choices;
      } catch (const RequestFailure& f) {
        last_error = f.message;
        if (!f.retryable) break;
      }
      if (attempt < retry_.max_attempts) {
        std::this_thread::sleep_for(retry_.backoff_base * (1 << (attempt - 1)));
      }
    }
    throw BackendError(last_error);
  }

 private:
  std::vector<std::string> once(const Json& body) {
    auto res = client_.Post(url_.path, body.dump(), "application/json");
    if (!res) {
      throw RequestFailure{"transport error: " + httplib::to_string(res.error())};
    }
    if (res->status != 200) {
      const bool retryable = res->status >= 500 || res->status == 429;
      throw RequestFailure{"HTTP " + std::to_string(res->status), retryable};
    }
    Json j;
    try {
      j = Json::parse(res->body);
    } catch (const Json::exception&) {
      throw RequestFailure{"malformed endpoint response: not JSON"};
    }
    auto it = j.find("choices");
    if (it == j.end() || !it->is_array() || it->empty()) {
      throw RequestFailure{"malformed endpoint response: no choices"};
    }
    std::vector<std::string> out;
    for (const auto& choice : *it) {
      const Json* content = nullptr;
      if (auto m = choice.find("message"); m != choice.end() && m->contains("content")) {
        content = &(*m)["content"];
      } else if (auto t = choice.find("text"); t != choice.end()) {
        content = &*t;
      }
      if (content == nullptr || !content->is_string()) {
        throw RequestFailure{"malformed endpoint response: choice without content"};
      }
      std::string text = normalize_text(content->get<std::string>());
      if (text.empty()) {
        throw RequestFailure{"malformed endpoint response: empty generation"};
      }
      out.push_back(std::move(text));
    }
    return out;
  }

  detail::UrlParts url_;
  httplib::Client client_;
  RetryPolicy retry_;
};

// Ids already complete in an existing output file. A torn last line (no
// trailing newline) is truncated away so appends stay line-aligned.
std::unordered_set<std::string> completed_ids(const std::filesystem::path& path) {
  std::unordered_set<std::string> ids;
  if (!std::filesystem::exists(path)) return ids;
  std::string content;
  {
    std::ifstream in(path, std::ios::binary);
    content.assign(std::istreambuf_iterator<char>(in), {});
  }
  const auto last_nl = content.rfind('\n');
  const std::size_t keep = last_nl == std::string::npos ? 0 : last_nl + 1;
  if (keep != content.size()) {
    std::filesystem::resize_file(path, keep);
    content.resize(keep);
  }
  std::size_t begin = 0;
  while (begin < content.size()) {
    const auto end = content.find('\n', begin);
    const std::string line = content.substr(begin, end - begin);
    begin = end + 1;
    if (line.empty()) continue;
    try {
      ids.insert(sample_set_from_json(Json::parse(line)).id);
    } catch (const std::exception& e) {
      throw ValidationError("existing output " + path.string() +
                            " has an invalid line: " + e.what());
    }
  }
  return ids;
}

}  // namespace

void SamplingJob::validate() const {
  generation.validate();
  if (concurrency < 1) throw ValidationError("concurrency must be >= 1");
  if (retry.max_attempts < 1) throw ValidationError("max_attempts must be >= 1");
  if (generation.endpoint_url.empty()) throw ValidationError("endpoint_url is empty");
  if (output_path.empty()) throw ValidationError("output path is empty");
  detail::split_url(generation.endpoint_url);
}

Json chat_request(const GenerationConfig& config, const QARecord& record,
                  double temperature, int n) {
  Json user_content;
  if (auto it = record.meta.find("image_url"); it != record.meta.end() && it->is_string()) {
    user_content = Json::array({{{"type", "text"}, {"text", record.question}},
                                {{"type", "image_url"}, {"image_url", {{"url", *it}}}}});
  } else {
    user_content = record.question;
  }
  Json messages = Json::array();
  if (!config.prompt_template.empty()) {
    messages.push_back({{"role", "system"}, {"content", config.prompt_template}});
  }
  messages.push_back({{"role", "user"}, {"content", std::move(user_content)}});
  return Json{{"model", config.model_name},
              {"messages", std::move(messages)},
              {"temperature", temperature},
              {"top_k", config.top_k},
              {"top_p", config.top_p},
              {"n", n}};
}

Json SamplingSummary::to_json() const {
  Json recs = Json::array();
  Json failures = Json::array();
  for (const auto& r : records) {
    recs.push_back({{"id", r.id}, {"requests", r.requests}, {"attempts", r.attempts},
                    {"ok", r.ok}, {"error", r.error}});
    if (!r.ok) failures.push_back(r.id);
  }
  return Json{{"records_total", records_total},
              {"records_skipped", records_skipped},
              {"records_completed", records_completed},
              {"records_failed", records_failed},
              {"requests_sent", requests_sent},
              {"responses_ok", responses_ok},
              {"generations", generations},
              {"failures", std::move(failures)},
              {"records", std::move(recs)}};
}

SamplingSummary run_sampling(const SamplingJob& job) {
  job.validate();
  std::vector<QARecord> records = read_all(load_dataset(job.dataset_path));
  const auto done = completed_ids(job.output_path);

  SamplingSummary summary;
  summary.records_total = records.size();
  std::vector<std::size_t> todo;
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (done.count(records[i].id)) {
      ++summary.records_skipped;
    } else {
      todo.push_back(i);
    }
  }

  std::vector<RecordSummary> per_record(todo.size());
  std::vector<std::optional<SampleSet>> finished(todo.size());
  std::vector<bool> ready(todo.size(), false);
  std::size_t next_to_write = 0;
  std::mutex write_mutex;
  JsonlWriter writer(job.output_path, JsonlWriter::Mode::kAppend);

  // Writes the contiguous finished prefix so the file follows input order.
  auto publish = [&](std::size_t slot) {
    std::lock_guard lock(write_mutex);
    ready[slot] = true;
    while (next_to_write < todo.size() && ready[next_to_write]) {
      if (finished[next_to_write]) {
        writer.write(to_json(*finished[next_to_write]));
        writer.flush();
        finished[next_to_write].reset();
      }
      ++next_to_write;
    }
  };

  std::atomic<std::size_t> cursor{0};
  std::atomic<std::size_t> sent{0};
  std::atomic<std::size_t> ok{0};
  const GenerationConfig& gen = job.generation;

  auto worker = [&] {
    ChatEndpoint endpoint(job);
    for (std::size_t slot = cursor++; slot < todo.size(); slot = cursor++) {
      const QARecord& record = records[todo[slot]];
      RecordSummary& rs = per_record[slot];
      rs.id = record.id;
      try {
        SampleSet set;
        set.id = record.id;
        set.generation_config = gen;
        set.greedy_answer = endpoint.complete(
            chat_request(gen, record, gen.greedy_temperature, 1), rs, sent, ok)[0];
        while (set.samples.size() < static_cast<std::size_t>(gen.n_samples)) {
          const int want = gen.n_samples - static_cast<int>(set.samples.size());
          auto got = endpoint.complete(
              chat_request(gen, record, gen.sample_temperature, want), rs, sent, ok);
          if (got.size() > static_cast<std::size_t>(want)) got.resize(want);
          set.samples.insert(set.samples.end(), got.begin(), got.end());
        }
        finished[slot] = std::move(set);
        rs.ok = true;
      } catch (const std::exception& e) {
        rs.ok = false;
        rs.error = e.what();
      }
      publish(slot);
    }
  };

  const std::size_t threads =
      std::min<std::size_t>(static_cast<std::size_t>(job.concurrency), todo.size());
  {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  }

  summary.requests_sent = sent;
  summary.responses_ok = ok;
  for (auto& rs : per_record) {
    if (rs.ok) {
      ++summary.records_completed;
      summary.generations += 1 + static_cast<std::size_t>(gen.n_samples);
    } else {
      ++summary.records_failed;
    }
  }
  summary.records = std::move(per_record);
  return summary;
}

}  // namespace qasnne
