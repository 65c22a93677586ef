#include "wikievents/external.hpp"

#include <cerrno>
#include <cmath>
#include <cstring>
#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/socket.h>
#include <sys/wait.h>
#include <unistd.h>

#include "wikievents/error.hpp"

namespace wikievents::classify {
namespace {

constexpr std::size_t kStderrTail = 4096;

nlohmann::json ParseResponse(std::string_view line) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception&) {
    throw Error(ErrorKind::kProtocol,
                "response is not JSON: '" + std::string(line.substr(0, 200)) + "'");
  }
  if (!j.is_object() || !j.contains("ok") || !j["ok"].is_boolean()) {
    throw Error(ErrorKind::kProtocol, "response lacks a boolean 'ok'");
  }
  if (!j["ok"].get<bool>()) {
    const auto it = j.find("error");
    throw Error(ErrorKind::kBackend,
                "external model failed: " +
                    (it != j.end() && it->is_string() ? it->get<std::string>()
                                                      : std::string("no message")));
  }
  return j;
}

void CloseFd(int& fd) {
  if (fd >= 0) ::close(fd);
  fd = -1;
}

}  // namespace

std::string TrainRequest(std::string_view train_path, const nlohmann::json& params) {
  nlohmann::ordered_json j;
  j["cmd"] = "train";
  j["train_path"] = train_path;
  j["params"] = params.is_null() ? nlohmann::json::object() : params;
  return j.dump();
}

std::string ScoreRequest(std::string_view model_id,
                         std::span<const std::string> sentences) {
  nlohmann::ordered_json j;
  j["cmd"] = "score";
  j["model_id"] = model_id;
  j["sentences"] = std::vector<std::string>(sentences.begin(), sentences.end());
  return j.dump();
}

std::string ParseTrainResponse(std::string_view line) {
  const nlohmann::json j = ParseResponse(line);
  const auto it = j.find("model_id");
  if (it == j.end() || !it->is_string() || it->get<std::string>().empty()) {
    throw Error(ErrorKind::kProtocol, "train response lacks a model_id");
  }
  return it->get<std::string>();
}

std::vector<double> ParseScoreResponse(std::string_view line,
                                       std::size_t expected_count) {
  const nlohmann::json j = ParseResponse(line);
  const auto it = j.find("scores");
  if (it == j.end() || !it->is_array()) {
    throw Error(ErrorKind::kProtocol, "score response lacks a scores array");
  }
  if (it->size() != expected_count) {
    throw Error(ErrorKind::kProtocol,
                "got " + std::to_string(it->size()) + " scores for " +
                    std::to_string(expected_count) + " sentences");
  }
  std::vector<double> scores;
  scores.reserve(it->size());
  for (const auto& s : *it) {
    if (!s.is_number()) {
      throw Error(ErrorKind::kProtocol, "non-numeric score " + s.dump());
    }
    const double v = s.get<double>();
    if (!(v >= 0.0 && v <= 1.0)) {
      throw Error(ErrorKind::kProtocol, "score out of [0, 1]: " + s.dump());
    }
    scores.push_back(v);
  }
  return scores;
}

ExternalClient::ExternalClient(ExternalEndpoint endpoint)
    : endpoint_(std::move(endpoint)) {
  if (endpoint_.command.empty()) {
    throw Error(ErrorKind::kInvalidConfig, "external backend needs a command");
  }
  int io[2];
  int err[2];
  if (::socketpair(AF_UNIX, SOCK_STREAM | SOCK_CLOEXEC, 0, io) != 0) {
    throw Error(ErrorKind::kBackend, std::string("socketpair: ") + std::strerror(errno));
  }
  if (::pipe2(err, O_CLOEXEC) != 0) {
    ::close(io[0]);
    ::close(io[1]);
    throw Error(ErrorKind::kBackend, std::string("pipe: ") + std::strerror(errno));
  }
  std::vector<char*> argv;
  for (std::string& a : endpoint_.command) argv.push_back(a.data());
  argv.push_back(nullptr);

  pid_ = ::fork();
  if (pid_ < 0) {
    for (int fd : {io[0], io[1], err[0], err[1]}) ::close(fd);
    throw Error(ErrorKind::kBackend, std::string("fork: ") + std::strerror(errno));
  }
  if (pid_ == 0) {
    ::dup2(io[1], STDIN_FILENO);
    ::dup2(io[1], STDOUT_FILENO);
    ::dup2(err[1], STDERR_FILENO);
    ::execvp(argv[0], argv.data());
    const std::string msg = "cannot execute '" + endpoint_.command[0] +
                            "': " + std::strerror(errno) + "\n";
    [[maybe_unused]] auto n = ::write(STDERR_FILENO, msg.data(), msg.size());
    ::_exit(127);
  }
  ::close(io[1]);
  ::close(err[1]);
  io_fd_ = io[0];
  err_fd_ = err[0];
}

ExternalClient::~ExternalClient() { Stop(); }

void ExternalClient::Stop() {
  if (pid_ <= 0) return;
  CloseFd(io_fd_);  // EOF on stdin asks the child to exit
  int status = 0;
  bool exited = false;
  for (int i = 0; i < 50 && !exited; ++i) {
    exited = ::waitpid(pid_, &status, WNOHANG) == pid_;
    if (!exited) ::usleep(10000);
  }
  if (!exited) {
    ::kill(pid_, SIGKILL);
    ::waitpid(pid_, &status, 0);
  }
  CloseFd(err_fd_);
  pid_ = -1;
}

void ExternalClient::DrainStderr() {
  if (err_fd_ < 0) return;
  char chunk[4096];
  for (;;) {
    pollfd p{err_fd_, POLLIN, 0};
    if (::poll(&p, 1, 0) <= 0) return;
    const ssize_t n = ::read(err_fd_, chunk, sizeof chunk);
    if (n <= 0) {
      CloseFd(err_fd_);
      return;
    }
    stderr_tail_.append(chunk, static_cast<std::size_t>(n));
    if (stderr_tail_.size() > kStderrTail) {
      stderr_tail_.erase(0, stderr_tail_.size() - kStderrTail);
    }
  }
}

void ExternalClient::Fail(const std::string& what) {
  if (pid_ > 0) {
    ::kill(pid_, SIGKILL);
    // Give the pipe a moment so the diagnostics are complete.
    pollfd p{err_fd_, POLLIN, 0};
    if (err_fd_ >= 0) ::poll(&p, 1, 100);
  }
  DrainStderr();
  Stop();
  std::string message = "external model process: " + what;
  if (!stderr_tail_.empty()) message += "; stderr: " + stderr_tail_;
  throw Error(ErrorKind::kBackend, message);
}

std::string ExternalClient::Exchange(std::string_view request) {
  if (pid_ <= 0) Fail("not running");
  std::string line(request);
  line += '\n';
  for (std::size_t sent = 0; sent < line.size();) {
    const ssize_t n =
        ::send(io_fd_, line.data() + sent, line.size() - sent, MSG_NOSIGNAL);
    if (n < 0) {
      if (errno == EINTR) continue;
      Fail(std::string("write failed: ") + std::strerror(errno));
    }
    sent += static_cast<std::size_t>(n);
  }

  const auto deadline = std::chrono::steady_clock::now() + endpoint_.timeout;
  for (;;) {
    if (const auto nl = buffer_.find('\n'); nl != std::string::npos) {
      std::string response = buffer_.substr(0, nl);
      buffer_.erase(0, nl + 1);
      if (!response.empty() && response.back() == '\r') response.pop_back();
      return response;
    }
    const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(
        deadline - std::chrono::steady_clock::now());
    if (left.count() <= 0) {
      Fail("timed out after " + std::to_string(endpoint_.timeout.count()) + " ms");
    }
    pollfd fds[2] = {{io_fd_, POLLIN, 0}, {err_fd_, POLLIN, 0}};
    const int ready = ::poll(fds, err_fd_ >= 0 ? 2 : 1, static_cast<int>(left.count()));
    if (ready < 0 && errno != EINTR) Fail(std::string("poll: ") + std::strerror(errno));
    if (err_fd_ >= 0 && (fds[1].revents & (POLLIN | POLLHUP))) DrainStderr();
    if (fds[0].revents & (POLLIN | POLLHUP)) {
      char chunk[65536];
      const ssize_t n = ::read(io_fd_, chunk, sizeof chunk);
      if (n == 0) Fail("exited before answering");
      if (n < 0 && errno != EINTR) Fail(std::string("read: ") + std::strerror(errno));
      if (n > 0) buffer_.append(chunk, static_cast<std::size_t>(n));
    }
  }
}

std::string ExternalClient::Train(std::string_view train_path,
                                  const nlohmann::json& params) {
  return ParseTrainResponse(Exchange(TrainRequest(train_path, params)));
}

std::vector<double> ExternalClient::Score(std::string_view model_id,
                                          std::span<const std::string> sentences) {
  return ParseScoreResponse(Exchange(ScoreRequest(model_id, sentences)),
                            sentences.size());
}

}  // namespace wikievents::classify
