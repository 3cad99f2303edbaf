#include "vrts/mock_server.hpp"

#include <deque>
#include <mutex>
#include <thread>

#include "httplib.h"
#include "json_util.hpp"

namespace vrts {

struct MockChatServer::State {
  httplib::Server server;
  std::thread thread;
  int port = 0;

  mutable std::mutex mu;
  std::deque<Reply> script;
  Responder responder;
  Reply fallback{200, "<think>mock</think><answer>A</answer>", "stop", 0};
  std::vector<Request> log;

  Reply next_reply(const std::string& body) {
    std::unique_lock lock(mu);
    if (!script.empty()) {
      Reply r = std::move(script.front());
      script.pop_front();
      return r;
    }
    if (responder) {
      Responder fn = responder;
      lock.unlock();
      return fn(body);
    }
    return fallback;
  }
};

namespace {

using detail::json;

void apply_stop(const std::string& request_body, MockChatServer::Reply& reply) {
  json request = json::parse(request_body, nullptr, false);
  if (request.is_discarded() || !request.contains("stop")) return;
  std::vector<std::string> stops;
  if (request["stop"].is_string()) stops.push_back(request["stop"].get<std::string>());
  if (request["stop"].is_array()) {
    for (const auto& s : request["stop"]) {
      if (s.is_string()) stops.push_back(s.get<std::string>());
    }
  }
  std::size_t cut = std::string::npos;
  for (const auto& s : stops) {
    if (!s.empty()) cut = std::min(cut, reply.content.find(s));
  }
  if (cut != std::string::npos) {
    reply.content.resize(cut);
    reply.finish_reason = "stop";
  }
}

}  // namespace

MockChatServer::MockChatServer() : state_(std::make_unique<State>()) {
  State* st = state_.get();
  st->server.Post(R"(.*)", [st](const httplib::Request& req, httplib::Response& res) {
    {
      Request logged{req.path, req.body, {}};
      for (const auto& [k, v] : req.headers) logged.headers[k] = v;
      std::lock_guard lock(st->mu);
      st->log.push_back(std::move(logged));
    }
    Reply reply = st->next_reply(req.body);
    if (reply.delay_ms > 0) std::this_thread::sleep_for(std::chrono::milliseconds(reply.delay_ms));
    res.status = reply.status;
    if (reply.status != 200) {
      res.set_content(json{{"error", {{"message", "mock error"}}}}.dump(), "application/json");
      return;
    }
    apply_stop(req.body, reply);
    const json body = {
        {"id", "mock"},
        {"object", "chat.completion"},
        {"choices",
         json::array({{{"index", 0},
                       {"message", {{"role", "assistant"}, {"content", reply.content}}},
                       {"finish_reason", reply.finish_reason}}})}};
    res.set_content(body.dump(), "application/json");
  });
  st->port = st->server.bind_to_any_port("127.0.0.1");
  if (st->port <= 0) throw Error("mock server could not bind a port");
  st->thread = std::thread([st] { st->server.listen_after_bind(); });
  st->server.wait_until_ready();
}

MockChatServer::~MockChatServer() {
  state_->server.stop();
  if (state_->thread.joinable()) state_->thread.join();
}

std::string MockChatServer::base_url() const {
  return "http://127.0.0.1:" + std::to_string(state_->port) + "/v1";
}

int MockChatServer::port() const { return state_->port; }

void MockChatServer::enqueue(Reply reply) {
  std::lock_guard lock(state_->mu);
  state_->script.push_back(std::move(reply));
}

void MockChatServer::set_default(Reply reply) {
  std::lock_guard lock(state_->mu);
  state_->fallback = std::move(reply);
}

void MockChatServer::set_responder(Responder responder) {
  std::lock_guard lock(state_->mu);
  state_->responder = std::move(responder);
}

std::vector<MockChatServer::Request> MockChatServer::requests() const {
  std::lock_guard lock(state_->mu);
  return state_->log;
}

void MockChatServer::clear_requests() {
  std::lock_guard lock(state_->mu);
  state_->log.clear();
}

}  // namespace vrts
