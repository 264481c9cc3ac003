#include "l2nas/external_oracle.hpp"

#include <fcntl.h>
#include <netdb.h>
#include <poll.h>
#include <signal.h>
#include <sys/socket.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <mutex>

namespace l2nas {

namespace {

[[noreturn]] void throw_errno(const std::string& what) {
  throw std::runtime_error(what + ": " + std::strerror(errno));
}

}  // namespace

struct ExternalOracle::Channel {
  int read_fd = -1;
  int write_fd = -1;
  pid_t child = -1;
  double timeout_s = 600.0;
  std::string buffer;
  std::size_t round_trips = 0;
  std::mutex mu;

  ~Channel() {
    if (write_fd >= 0) ::close(write_fd);
    if (read_fd >= 0 && read_fd != write_fd) ::close(read_fd);
    if (child > 0) {
      int status = 0;
      // Closing stdin signals the evaluator to exit; nudge it if it lingers.
      // The child runs as a process-group leader, so stray grandchildren
      // (shell-spawned evaluators) get swept as well.
      if (::waitpid(child, &status, WNOHANG) == 0) {
        ::kill(-child, SIGTERM);
        ::waitpid(child, &status, 0);
      }
      ::kill(-child, SIGKILL);
    }
  }

  void write_all(const std::string& data) {
    std::size_t sent = 0;
    while (sent < data.size()) {
      const ssize_t n = ::write(write_fd, data.data() + sent, data.size() - sent);
      if (n < 0) {
        if (errno == EINTR) continue;
        throw_errno("evaluator write failed");
      }
      sent += static_cast<std::size_t>(n);
    }
  }

  std::string read_line() {
    for (;;) {
      const auto nl = buffer.find('\n');
      if (nl != std::string::npos) {
        std::string line = buffer.substr(0, nl);
        buffer.erase(0, nl + 1);
        if (!line.empty() && line.back() == '\r') line.pop_back();
        return line;
      }
      struct pollfd pfd{read_fd, POLLIN, 0};
      const int ms = timeout_s <= 0 ? -1 : static_cast<int>(timeout_s * 1000.0);
      const int rv = ::poll(&pfd, 1, ms);
      if (rv < 0) {
        if (errno == EINTR) continue;
        throw_errno("evaluator poll failed");
      }
      if (rv == 0)
        throw TimeoutError("evaluator did not respond within " +
                           std::to_string(timeout_s) + " s");
      char chunk[4096];
      const ssize_t n = ::read(read_fd, chunk, sizeof(chunk));
      if (n < 0) {
        if (errno == EINTR) continue;
        throw_errno("evaluator read failed");
      }
      if (n == 0) throw ProtocolError("evaluator closed the connection");
      buffer.append(chunk, static_cast<std::size_t>(n));
    }
  }
};

namespace {

std::unique_ptr<ExternalOracle::Channel> open_exec(const std::string& command) {
  int to_child[2], from_child[2];
  if (::pipe(to_child) != 0) throw_errno("pipe failed");
  if (::pipe(from_child) != 0) {
    ::close(to_child[0]);
    ::close(to_child[1]);
    throw_errno("pipe failed");
  }
  const pid_t pid = ::fork();
  if (pid < 0) throw_errno("fork failed");
  if (pid == 0) {
    ::setpgid(0, 0);
    ::dup2(to_child[0], STDIN_FILENO);
    ::dup2(from_child[1], STDOUT_FILENO);
    ::close(to_child[0]);
    ::close(to_child[1]);
    ::close(from_child[0]);
    ::close(from_child[1]);
    ::execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
    _exit(127);
  }
  ::close(to_child[0]);
  ::close(from_child[1]);
  auto ch = std::make_unique<ExternalOracle::Channel>();
  ch->read_fd = from_child[0];
  ch->write_fd = to_child[1];
  ch->child = pid;
  return ch;
}

std::unique_ptr<ExternalOracle::Channel> open_tcp(const std::string& host,
                                                  const std::string& port) {
  struct addrinfo hints {};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  struct addrinfo* info = nullptr;
  const int rc = ::getaddrinfo(host.c_str(), port.c_str(), &hints, &info);
  if (rc != 0)
    throw std::runtime_error("cannot resolve evaluator endpoint " + host + ":" +
                             port + ": " + ::gai_strerror(rc));
  int fd = -1;
  for (auto* p = info; p != nullptr; p = p->ai_next) {
    fd = ::socket(p->ai_family, p->ai_socktype, p->ai_protocol);
    if (fd < 0) continue;
    if (::connect(fd, p->ai_addr, p->ai_addrlen) == 0) break;
    ::close(fd);
    fd = -1;
  }
  ::freeaddrinfo(info);
  if (fd < 0) throw std::runtime_error("cannot connect to evaluator " + host + ":" + port);
  auto ch = std::make_unique<ExternalOracle::Channel>();
  ch->read_fd = fd;
  ch->write_fd = fd;
  return ch;
}

std::unique_ptr<ExternalOracle::Channel> open_endpoint(const std::string& endpoint) {
  if (endpoint.rfind("exec:", 0) == 0) return open_exec(endpoint.substr(5));
  if (endpoint.rfind("tcp:", 0) == 0) {
    const std::string rest = endpoint.substr(4);
    const auto colon = rest.rfind(':');
    if (colon == std::string::npos)
      throw std::invalid_argument("tcp endpoint must be tcp:<host>:<port>");
    return open_tcp(rest.substr(0, colon), rest.substr(colon + 1));
  }
  throw std::invalid_argument("unknown evaluator endpoint '" + endpoint +
                              "' (expected exec:<cmd> or tcp:<host>:<port>)");
}

}  // namespace

ExternalOracle::ExternalOracle(SearchSpaceSpec space, const std::string& endpoint,
                               double timeout_s)
    : AccuracyOracle(std::move(space)), channel_(open_endpoint(endpoint)) {
  channel_->timeout_s = timeout_s;
}

ExternalOracle::ExternalOracle(SearchSpaceSpec space, int read_fd, int write_fd,
                               double timeout_s)
    : AccuracyOracle(std::move(space)), channel_(std::make_unique<Channel>()) {
  channel_->read_fd = read_fd;
  channel_->write_fd = write_fd;
  channel_->timeout_s = timeout_s;
}

ExternalOracle::~ExternalOracle() = default;

std::size_t ExternalOracle::round_trips() const {
  std::lock_guard<std::mutex> lock(channel_->mu);
  return channel_->round_trips;
}

double ExternalOracle::evaluate(const DiscreteArch&, const std::string& key, Split) {
  std::lock_guard<std::mutex> lock(channel_->mu);
  channel_->write_all("EVAL " + key + "\n");
  const std::string line = channel_->read_line();
  ++channel_->round_trips;
  if (line.rfind("ERR ", 0) == 0) throw EvaluatorError(line.substr(4));
  if (line == "ERR") throw EvaluatorError("evaluator reported failure");
  if (line.rfind("ACC ", 0) != 0)
    throw ProtocolError("malformed evaluator response: '" + line + "'");
  const std::string value = line.substr(4);
  std::size_t pos = 0;
  double acc = 0.0;
  try {
    acc = std::stod(value, &pos);
  } catch (const std::exception&) {
    throw ProtocolError("malformed evaluator accuracy: '" + value + "'");
  }
  if (pos != value.size())
    throw ProtocolError("malformed evaluator accuracy: '" + value + "'");
  if (!(acc >= 0.0 && acc <= 1.0))
    throw ProtocolError("evaluator accuracy " + value + " outside [0,1]");
  return acc;
}

}  // namespace l2nas
