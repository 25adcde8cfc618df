// Copyright 2026 The TArC Annotator Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef TARC_HTTP_H_
#define TARC_HTTP_H_

#include <optional>
#include <string>

#include "tarc/error.h"
#include "tarc/service.h"

namespace httplib {
class Server;
}

namespace tarc {

struct HttpOptions {
  // When set, every request needs "Authorization: Bearer <token>".
  std::optional<std::string> token;
};

// Reads the shared token from TARC_API_TOKEN; unset or empty disables it.
HttpOptions http_options_from_env();

int http_status(ErrorCode code);
// {"error": code, "detail": message, "loc": {...} or null}
Json error_to_json(const Error &error);

// Registers the /api routes on `server`. The service must outlive it.
void install_routes(httplib::Server &server, Service &service, const HttpOptions &options = {});

}  // namespace tarc

#endif  // TARC_HTTP_H_
