// Reference evaluator for the line protocol. Reads "EVAL <arch_key>" requests
// on stdin and answers "ACC <float>" or "ERR <message>" on stdout. Useful as a
// protocol example and as the test double for the external oracle.
#include <chrono>
#include <iostream>
#include <optional>
#include <string>
#include <thread>

#include "CLI11.hpp"
#include "l2nas/oracle.hpp"
#include "l2nas/space.hpp"

int main(int argc, char** argv) {
  CLI::App app{"l2nas evaluator stub (stdin/stdout line protocol)"};
  double fixed_acc = 0.5;
  bool malformed = false;
  std::string err_message;
  double sleep_s = 0.0;
  std::optional<std::uint64_t> synthetic_seed;
  int edges = 6, ops = 5;

  app.add_option("--acc", fixed_acc, "Answer every request with this accuracy");
  app.add_flag("--malformed", malformed, "Answer with a malformed line");
  app.add_option("--err", err_message, "Answer every request with ERR <message>");
  app.add_option("--sleep", sleep_s, "Seconds to wait before each response");
  app.add_option("--synthetic-seed", synthetic_seed,
                 "Score keys on the synthetic landscape with this seed");
  app.add_option("--edges", edges, "Edges of the synthetic space");
  app.add_option("--ops", ops, "Ops of the synthetic space");
  CLI11_PARSE(app, argc, argv);

  std::optional<l2nas::SearchSpaceSpec> space;
  std::optional<l2nas::SyntheticLandscape> land;
  if (synthetic_seed) {
    space = l2nas::builtin_space("synthetic", edges, ops);
    land = l2nas::SyntheticLandscape::generate(*synthetic_seed, edges, ops);
  }

  std::string line;
  while (std::getline(std::cin, line)) {
    if (sleep_s > 0.0)
      std::this_thread::sleep_for(std::chrono::duration<double>(sleep_s));
    if (malformed) {
      std::cout << "abc" << std::endl;
      continue;
    }
    if (!err_message.empty()) {
      std::cout << "ERR " << err_message << std::endl;
      continue;
    }
    if (line.rfind("EVAL ", 0) != 0) {
      std::cout << "ERR unknown request verb" << std::endl;
      continue;
    }
    const std::string key = line.substr(5);
    if (land) {
      try {
        const auto arch = l2nas::parse_arch_key(*space, key);
        std::cout << "ACC " << l2nas::synthetic_acc(*land, arch) << std::endl;
      } catch (const std::exception& e) {
        std::cout << "ERR " << e.what() << std::endl;
      }
    } else {
      std::cout << "ACC " << fixed_acc << std::endl;
    }
  }
  return 0;
}
