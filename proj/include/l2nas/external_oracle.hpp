#ifndef L2NAS_EXTERNAL_ORACLE_HPP
#define L2NAS_EXTERNAL_ORACLE_HPP

#include <memory>
#include <string>

#include "l2nas/oracle.hpp"

namespace l2nas {

struct ProtocolError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct TimeoutError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
// Raised when the evaluator answers "ERR <message>".
struct EvaluatorError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Newline-delimited request/response channel to an accuracy evaluator:
//   -> EVAL <arch_key>\n
//   <- ACC <float>\n   |   ERR <message>\n
// One request in flight at a time; responses are memoized by arch key.
//
// Endpoints:
//   exec:<command>    spawn <command> via /bin/sh and speak over its stdio
//   tcp:<host>:<port> connect a TCP socket
class ExternalOracle : public AccuracyOracle {
 public:
  ExternalOracle(SearchSpaceSpec space, const std::string& endpoint,
                 double timeout_s = 600.0);
  // Speaks the protocol over pre-opened descriptors (in-process evaluators,
  // tests). Takes ownership of the descriptors.
  ExternalOracle(SearchSpaceSpec space, int read_fd, int write_fd,
                 double timeout_s = 600.0);
  ~ExternalOracle() override;

  ExternalOracle(const ExternalOracle&) = delete;
  ExternalOracle& operator=(const ExternalOracle&) = delete;

  std::string dataset() const override { return "external"; }

  // Protocol round trips performed (memo hits excluded).
  std::size_t round_trips() const;

  struct Channel;  // wire-level details, defined in the .cpp

 protected:
  double evaluate(const DiscreteArch& arch, const std::string& key,
                  Split split) override;
  // The wire protocol carries no split, so one answer serves both.
  bool split_sensitive() const override { return false; }

 private:
  std::unique_ptr<Channel> channel_;
};

}  // namespace l2nas

#endif  // L2NAS_EXTERNAL_ORACLE_HPP
