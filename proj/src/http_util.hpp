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

#pragma once

#include <string>
#include <string_view>

namespace qasnne::detail {

struct UrlParts {
  std::string origin;  // scheme://host[:port]
  std::string path;    // begins with '/', may be just "/"
};

// Splits an http(s) URL into origin and path. Throws ValidationError.
UrlParts split_url(std::string_view url);

// Joins a base path and a route without doubling slashes.
std::string join_path(std::string_view base, std::string_view route);

}  // namespace qasnne::detail
