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

#include "qasnne/scorer_client.hpp"

#include <cmath>
#include <numeric>

#include "http_util.hpp"
#include "httplib.h"
#include "qasnne/errors.hpp"

namespace qasnne {
namespace {

using Json = nlohmann::json;

// Returns the permutation that maps response slot -> request index, checking
// that an "indices" echo (when present) is a permutation of 0..n-1.
std::vector<std::size_t> echoed_order(const Json& response, std::size_t n,
                                      const std::string& route) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  auto it = response.find("indices");
  if (it == response.end()) return order;
  if (!it->is_array() || it->size() != n) {
    throw BackendError(route + ": 'indices' length does not match request");
  }
  std::vector<bool> seen(n, false);
  for (std::size_t k = 0; k < n; ++k) {
    const auto idx = (*it)[k].get<long long>();
    if (idx < 0 || static_cast<std::size_t>(idx) >= n || seen[idx]) {
      throw BackendError(route + ": 'indices' is not a permutation");
    }
    seen[idx] = true;
    order[k] = static_cast<std::size_t>(idx);
  }
  return order;
}

double finite_number(const Json& v, const std::string& what) {
  if (!v.is_number()) throw BackendError(what + " is not a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) throw BackendError(what + " is not finite");
  return x;
}

const Json& list_field(const Json& response, const char* field, std::size_t n,
                       const std::string& route) {
  auto it = response.find(field);
  if (it == response.end() || !it->is_array()) {
    throw BackendError(route + ": response lacks '" + field + "' array");
  }
  if (it->size() != n) {
    throw BackendError(route + ": " + std::to_string(it->size()) + " " + field +
                       " for " + std::to_string(n) + " inputs");
  }
  return *it;
}

}  // namespace

ScorerClient::ScorerClient(std::string base_url, std::chrono::milliseconds timeout)
    : base_url_(std::move(base_url)), timeout_(timeout) {
  detail::split_url(base_url_);
}

Json ScorerClient::post(const std::string& route, const Json& body) {
  const auto url = detail::split_url(base_url_);
  httplib::Client client(url.origin);
  client.set_connection_timeout(timeout_);
  client.set_read_timeout(timeout_);
  const std::string path = detail::join_path(url.path, route);
  auto res = body.is_null() ? client.Get(path)
                            : client.Post(path, body.dump(), "application/json");
  if (!res) {
    throw BackendError("scorer-service " + route + ": " +
                       httplib::to_string(res.error()));
  }
  if (res->status != 200) {
    throw BackendError("scorer-service " + route + ": HTTP " +
                       std::to_string(res->status));
  }
  try {
    return Json::parse(res->body);
  } catch (const Json::exception&) {
    throw BackendError("scorer-service " + route + ": malformed JSON");
  }
}

std::vector<Eigen::VectorXd> ScorerClient::embed(std::span<const std::string> texts) {
  const Json res = post("/embed", Json{{"texts", texts}});
  const Json& vectors = list_field(res, "vectors", texts.size(), "/embed");
  const auto order = echoed_order(res, texts.size(), "/embed");
  std::vector<Eigen::VectorXd> out(texts.size());
  Eigen::Index dim = -1;
  for (std::size_t k = 0; k < vectors.size(); ++k) {
    const Json& v = vectors[k];
    if (!v.is_array()) throw BackendError("/embed: vector is not an array");
    Eigen::VectorXd e(static_cast<Eigen::Index>(v.size()));
    for (std::size_t d = 0; d < v.size(); ++d) {
      e(static_cast<Eigen::Index>(d)) = finite_number(v[d], "/embed component");
    }
    if (dim >= 0 && e.size() != dim) throw BackendError("/embed: ragged dimensions");
    dim = e.size();
    out[order[k]] = std::move(e);
  }
  if (auto it = res.find("dim"); it != res.end() && dim >= 0 &&
                                 it->get<Eigen::Index>() != dim) {
    throw BackendError("/embed: 'dim' disagrees with vectors");
  }
  return out;
}

std::vector<NliClassLogits> ScorerClient::nli(std::span<const NliPair> pairs) {
  Json req_pairs = Json::array();
  for (const auto& p : pairs) {
    req_pairs.push_back({{"premise", p.premise}, {"hypothesis", p.hypothesis}});
  }
  const Json res = post("/nli", Json{{"pairs", std::move(req_pairs)}});
  const Json& logits = list_field(res, "logits", pairs.size(), "/nli");
  const auto order = echoed_order(res, pairs.size(), "/nli");
  std::vector<NliClassLogits> out(pairs.size());
  for (std::size_t k = 0; k < logits.size(); ++k) {
    const Json& l = logits[k];
    if (!l.is_object()) throw BackendError("/nli: logits entry is not an object");
    out[order[k]] = NliClassLogits{
        finite_number(l.value("entail", Json()), "/nli entail"),
        finite_number(l.value("neutral", Json()), "/nli neutral"),
        finite_number(l.value("contra", Json()), "/nli contra")};
  }
  return out;
}

std::vector<double> ScorerClient::rerank(const std::string& query,
                                         std::span<const std::string> candidates) {
  const Json res = post("/rerank", Json{{"query", query}, {"candidates", candidates}});
  const Json& logits = list_field(res, "logits", candidates.size(), "/rerank");
  const auto order = echoed_order(res, candidates.size(), "/rerank");
  std::vector<double> out(candidates.size());
  for (std::size_t k = 0; k < logits.size(); ++k) {
    out[order[k]] = finite_number(logits[k], "/rerank logit");
  }
  return out;
}

Json ScorerClient::health() { return post("/health", Json()); }

}  // namespace qasnne
