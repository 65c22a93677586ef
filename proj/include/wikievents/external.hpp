#pragma once

#include <chrono>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <sys/types.h>
#include <vector>

#include <json.hpp>

// Client side of the external model protocol. One JSON object per line over
// the child's stdin/stdout:
//   {"cmd":"train","train_path":...,"params":{...}} -> {"ok":true,"model_id":...}
//   {"cmd":"score","model_id":...,"sentences":[...]} -> {"ok":true,"scores":[...]}
//   failure                                          -> {"ok":false,"error":...}
namespace wikievents::classify {

std::string TrainRequest(std::string_view train_path, const nlohmann::json& params);
std::string ScoreRequest(std::string_view model_id,
                         std::span<const std::string> sentences);

// Both throw protocol-error on malformed responses and backend-error when the
// process answers ok=false.
std::string ParseTrainResponse(std::string_view line);
std::vector<double> ParseScoreResponse(std::string_view line,
                                       std::size_t expected_count);

struct ExternalEndpoint {
  std::vector<std::string> command;  // argv; command[0] is looked up in PATH
  std::chrono::milliseconds timeout{std::chrono::minutes(10)};
};

// Owns one child process and serializes requests to it. Failures to start,
// early exits and timeouts are backend-errors carrying the tail of the
// child's stderr.
class ExternalClient {
 public:
  explicit ExternalClient(ExternalEndpoint endpoint);
  ~ExternalClient();
  ExternalClient(const ExternalClient&) = delete;
  ExternalClient& operator=(const ExternalClient&) = delete;

  std::string Train(std::string_view train_path, const nlohmann::json& params);
  std::vector<double> Score(std::string_view model_id,
                            std::span<const std::string> sentences);

  // Sends one request line and returns the response line.
  std::string Exchange(std::string_view request);

 private:
  [[noreturn]] void Fail(const std::string& what);
  void DrainStderr();
  void Stop();

  ExternalEndpoint endpoint_;
  pid_t pid_ = -1;
  int io_fd_ = -1;
  int err_fd_ = -1;
  std::string buffer_;
  std::string stderr_tail_;
};

}  // namespace wikievents::classify
