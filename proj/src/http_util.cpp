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

#include "http_util.hpp"

#include "qasnne/errors.hpp"

namespace qasnne::detail {

UrlParts split_url(std::string_view url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string_view::npos) {
    throw ValidationError("URL '" + std::string(url) + "' lacks a scheme");
  }
  const auto scheme = url.substr(0, scheme_end);
  if (scheme != "http" && scheme != "https") {
    throw ValidationError("unsupported URL scheme in '" + std::string(url) + "'");
  }
  const auto host_begin = scheme_end + 3;
  const auto path_begin = url.find('/', host_begin);
  UrlParts parts;
  if (path_begin == std::string_view::npos) {
    parts.origin = std::string(url);
    parts.path = "/";
  } else {
    parts.origin = std::string(url.substr(0, path_begin));
    parts.path = std::string(url.substr(path_begin));
  }
  if (parts.origin.size() == host_begin) {
    throw ValidationError("URL '" + std::string(url) + "' lacks a host");
  }
  return parts;
}

std::string join_path(std::string_view base, std::string_view route) {
  std::string out(base);
  while (!out.empty() && out.back() == '/') out.pop_back();
  if (route.empty() || route.front() != '/') out += '/';
  out += route;
  return out;
}

}  // namespace qasnne::detail
