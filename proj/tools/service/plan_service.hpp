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

#pragma once

#include <functional>
#include <memory>
#include <string>
#include <string_view>

namespace httplib {
class Server;
}

namespace ppipower::tools {

struct HttpReply {
    int status = 200;
    std::string body;  ///< always a JSON document
};

/// Routes one request. Pure: the reply depends only on the arguments.
HttpReply handle_request(std::string_view method, std::string_view path,
                         std::string_view content_type, std::string_view body);

/// An httplib server with every route bound to handle_request.
std::unique_ptr<httplib::Server> make_server();

struct ServeOptions {
    std::string host = "127.0.0.1";
    int port = 8080;  ///< 0 picks a free port
};

/// Blocks serving requests until the server is stopped. `on_ready` receives
/// the bound port once listening starts.
int serve(const ServeOptions& opt, const std::function<void(int)>& on_ready = {});

}  // namespace ppipower::tools
