#pragma once

#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

namespace vrts {

// In-process chat-completions server for tests and offline runs.
//
// Replies are served from a FIFO script, then from a responder callback, then
// from the default reply. Like real servers, a configured stop string cuts the
// content before the stop string and reports finish_reason "stop".
class MockChatServer {
 public:
  struct Reply {
    int status = 200;
    std::string content;
    std::string finish_reason = "stop";
    int delay_ms = 0;
  };

  struct Request {
    std::string path;
    std::string body;
    std::map<std::string, std::string> headers;
  };

  using Responder = std::function<Reply(const std::string& body)>;

  MockChatServer();
  ~MockChatServer();
  MockChatServer(const MockChatServer&) = delete;
  MockChatServer& operator=(const MockChatServer&) = delete;

  std::string base_url() const;
  int port() const;

  void enqueue(Reply reply);
  void set_default(Reply reply);
  void set_responder(Responder responder);

  std::vector<Request> requests() const;
  void clear_requests();

 private:
  struct State;
  std::unique_ptr<State> state_;
};

}  // namespace vrts
