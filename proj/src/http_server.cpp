#include "httplib.h"
#include "verigrade/gateway.hpp"

namespace verigrade::gateway {

struct HttpServer::Impl {
    explicit Impl(Gateway& g) : gw(g) {}
    Gateway& gw;
    httplib::Server svr;
};

namespace {

std::optional<std::string_view> auth_of(const httplib::Request& req) {
    auto it = req.headers.find("Authorization");
    if (it == req.headers.end()) return std::nullopt;
    return std::string_view(it->second);
}

void reply(httplib::Response& res, const Response& r) {
    res.status = r.status;
    res.set_content(r.body, "application/json");
}

}  // namespace

HttpServer::HttpServer(Gateway& gateway) : impl_(std::make_unique<Impl>(gateway)) {
    auto& svr = impl_->svr;
    auto& gw = impl_->gw;
    // Reads must stay responsive while every verifier worker is busy.
    std::size_t threads = static_cast<std::size_t>(gw.config().workers) + 8;
    svr.new_task_queue = [threads] { return new httplib::ThreadPool(threads); };
    svr.set_payload_max_length(4 * gw.config().max_answer_bytes + 4096);

    svr.Get("/questions", [&gw](const httplib::Request& req, httplib::Response& res) {
        reply(res, gw.list_questions(auth_of(req)));
    });
    svr.Get(R"(/questions/([^/]+))", [&gw](const httplib::Request& req, httplib::Response& res) {
        reply(res, gw.get_question(auth_of(req), req.matches[1].str()));
    });
    svr.Post(R"(/questions/([^/]+)/attempts)", [&gw](const httplib::Request& req, httplib::Response& res) {
        reply(res, gw.post_attempt(auth_of(req), req.matches[1].str(), req.body));
    });
    svr.Get("/overview", [&gw](const httplib::Request& req, httplib::Response& res) {
        reply(res, gw.overview(auth_of(req)));
    });
    svr.set_error_handler([](const httplib::Request&, httplib::Response& res) {
        if (res.body.empty()) {
            std::string msg = res.status == 413 ? "answer too large" : "not found";
            res.set_content("{\"error\":\"" + msg + "\"}", "application/json");
        }
    });
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind(const std::string& host, int port) {
    if (port == 0) return impl_->svr.bind_to_any_port(host);
    return impl_->svr.bind_to_port(host, port) ? port : -1;
}

bool HttpServer::listen() { return impl_->svr.listen_after_bind(); }

void HttpServer::stop() {
    if (impl_) impl_->svr.stop();
}

}  // namespace verigrade::gateway
