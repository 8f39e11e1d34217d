/*
   Copyright 2026 The ppipower Authors

   Licensed under the Apache License, Version 2.0 (the "License");
   you may not use this file except in compliance with the License.
   You may obtain a copy of the License at

       http://www.apache.org/licenses/LICENSE-2.0

   Unless required by applicable law or agreed to in writing, software
   distributed under the License is distributed on an "AS IS" BASIS,
   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
   See the License for the specific language governing permissions and
   limitations under the License.
*/

#include "service/plan_service.hpp"

#include <httplib.h>

#include "common/plan_json.hpp"

namespace ppipower::tools {

namespace {

constexpr std::string_view kPlanPrefix = "/v1/plan/";

HttpReply reply(int status, const Json& j) { return {status, render(j)}; }

HttpReply error_reply(int status, const std::string& code, const std::string& message) {
    return reply(status, RequestError(status, code, {{"", message}}).to_json());
}

bool is_json(std::string_view content_type) {
    const auto semi = content_type.find(';');
    std::string_view media = content_type.substr(0, semi);
    while (!media.empty() && media.back() == ' ') media.remove_suffix(1);
    return media == "application/json";
}

}  // namespace

HttpReply handle_request(std::string_view method, std::string_view path,
                         std::string_view content_type, std::string_view body) {
    if (path == "/v1/healthz") {
        if (method != "GET") return error_reply(405, "method_not_allowed", "use GET");
        Json j;
        j["status"] = "ok";
        j["version"] = ppw_version();
        return reply(200, j);
    }
    const bool plan_route = path.starts_with(kPlanPrefix);
    if (!plan_route && path != "/v1/calibrate") {
        return error_reply(404, "not_found", "no route for " + std::string(path));
    }
    const std::string_view design = plan_route ? path.substr(kPlanPrefix.size()) : std::string_view{};
    if (plan_route && !is_plan_design(design)) {
        return error_reply(404, "not_found", "unknown design '" + std::string(design) + "'");
    }
    if (method != "POST") return error_reply(405, "method_not_allowed", "use POST");
    if (!is_json(content_type)) {
        return error_reply(415, "unsupported_media_type", "Content-Type must be application/json");
    }
    Json parsed;
    try {
        parsed = Json::parse(body);
    } catch (const Json::parse_error& e) {
        return error_reply(400, "invalid_json", e.what());
    }
    try {
        return reply(200, plan_route ? plan(design, parsed) : calibrate(parsed));
    } catch (const RequestError& e) {
        return reply(e.status(), e.to_json());
    }
}

std::unique_ptr<httplib::Server> make_server() {
    auto server = std::make_unique<httplib::Server>();
    auto bridge = [](const httplib::Request& req, httplib::Response& res) {
        const HttpReply r =
            handle_request(req.method, req.path, req.get_header_value("Content-Type"), req.body);
        res.status = r.status;
        res.set_content(r.body, "application/json");
    };
    server->Get(R"(/.*)", bridge);
    server->Post(R"(/.*)", bridge);
    server->Put(R"(/.*)", bridge);
    server->Delete(R"(/.*)", bridge);
    return server;
}

int serve(const ServeOptions& opt, const std::function<void(int)>& on_ready) {
    auto server = make_server();
    const int port = opt.port == 0 ? server->bind_to_any_port(opt.host) : opt.port;
    if (opt.port != 0 && !server->bind_to_port(opt.host, opt.port)) return -1;
    if (port < 0) return -1;
    if (on_ready) on_ready(port);
    return server->listen_after_bind() ? 0 : -1;
}

}  // namespace ppipower::tools
