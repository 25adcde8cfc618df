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

#include "tarc/http.h"

#include <cstdlib>

// After the tarc headers: the resolver headers it pulls in define macros
// that clash with Eigen.
#include <httplib.h>

namespace tarc {

namespace {

constexpr const char *kJson = "application/json; charset=utf-8";

void send(httplib::Response &res, int status, const Json &body) {
  res.status = status;
  res.set_content(body.dump(), kJson);
}

void send_error(httplib::Response &res, const Error &e) {
  send(res, http_status(e.code()), error_to_json(e));
}

Json body_json(const httplib::Request &req) {
  if (req.body.empty()) return Json::object();
  try {
    return Json::parse(req.body);
  } catch (const Json::parse_error &e) {
    throw Error(ErrorCode::kInvalidArgument, std::string("request body: ") + e.what());
  }
}

int index_param(const httplib::Request &req) {
  const std::string &text = req.matches[1];
  try {
    return std::stoi(text);
  } catch (const std::exception &) {
    throw Error(ErrorCode::kNotFound, "no such index '" + text + "'");
  }
}

using Handler = std::function<void(const httplib::Request &, httplib::Response &)>;

Handler guarded(const HttpOptions &options, Handler fn) {
  return [options, fn = std::move(fn)](const httplib::Request &req, httplib::Response &res) {
    if (options.token && req.get_header_value("Authorization") != "Bearer " + *options.token) {
      send(res, 401,
           Json{{"error", "UNAUTHORIZED"}, {"detail", "missing or wrong token"}, {"loc", nullptr}});
      return;
    }
    try {
      fn(req, res);
    } catch (const Error &e) {
      send_error(res, e);
    } catch (const std::exception &e) {
      send_error(res, Error(ErrorCode::kIo, e.what()));
    }
  };
}

}  // namespace

HttpOptions http_options_from_env() {
  HttpOptions options;
  const char *token = std::getenv("TARC_API_TOKEN");
  if (token != nullptr && *token != '\0') options.token = token;
  return options;
}

int http_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::kNotFound:
    case ErrorCode::kCheckpointNotFound:
      return 404;
    case ErrorCode::kBusy:
    case ErrorCode::kPlanDiscontinuity:
      return 409;
    case ErrorCode::kInvalidArgument:
    case ErrorCode::kInvalidConfig:
      return 400;
    case ErrorCode::kIo:
      return 500;
    default:
      return 422;
  }
}

Json error_to_json(const Error &error) {
  Json loc = nullptr;
  if (const auto &l = error.location()) {
    loc = Json{{"sentence", l->sentence_id},
               {"token", l->token >= 0 ? Json(l->token) : Json(nullptr)},
               {"level", l->level.empty() ? Json(nullptr) : Json(l->level)}};
  }
  return Json{{"error", code_name(error.code())}, {"detail", error.detail()}, {"loc", loc}};
}

void install_routes(httplib::Server &server, Service &service, const HttpOptions &options) {
  server.Get("/api/blocks", guarded(options, [&](const auto &, auto &res) {
               send(res, 200, service.list_blocks());
             }));
  server.Get(R"(/api/blocks/([^/]+))", guarded(options, [&](const auto &req, auto &res) {
               send(res, 200, service.get_block(index_param(req)));
             }));
  server.Put(R"(/api/blocks/([^/]+)/corrections)",
             guarded(options, [&](const auto &req, auto &res) {
               const int index = index_param(req);
               send(res, 200, service.submit_corrections(index, body_json(req)).to_json());
             }));
  server.Post("/api/train", guarded(options, [&](const auto &req, auto &res) {
                send(res, 202, job_to_json(service.trigger_training(body_json(req))));
              }));
  server.Get(R"(/api/jobs/([^/]+))", guarded(options, [&](const auto &req, auto &res) {
               send(res, 200, job_to_json(service.job(index_param(req))));
             }));
  server.Get("/api/stats", guarded(options, [&](const auto &, auto &res) {
               send(res, 200, service.stats());
             }));
  server.Get(R"(/api/reports/([^/]+))", guarded(options, [&](const auto &req, auto &res) {
               send(res, 200, service.report(index_param(req)));
             }));
  server.set_error_handler([](const httplib::Request &req, httplib::Response &res) {
    if (!res.body.empty()) return;
    if (res.status == 404) {
      send(res, 404, Json{{"error", code_name(ErrorCode::kNotFound)},
                          {"detail", "no route " + req.method + " " + req.path},
                          {"loc", nullptr}});
    }
  });
}

}  // namespace tarc
