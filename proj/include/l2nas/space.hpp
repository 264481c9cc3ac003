#ifndef L2NAS_SPACE_HPP
#define L2NAS_SPACE_HPP

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "l2nas/matrix.hpp"
#include "l2nas/rng.hpp"

namespace l2nas {

// How a block of continuous values maps to binary operation choices.
enum class Discretizer {
  kRowArgmax,  // one op per edge, argmax per row
  kDartsTop2,  // per intermediate node, keep the 2 strongest incoming edges
};

struct MatrixBlock {
  int rows = 0;  // edge count
  int cols = 0;  // operation count
  std::vector<std::string> op_names;
  Discretizer discretizer = Discretizer::kRowArgmax;
  int node_count = 0;  // intermediate nodes, meaningful only for kDartsTop2
};

struct SearchSpaceSpec {
  std::string name;
  std::vector<MatrixBlock> blocks;
  int total_dim = 0;  // sum of rows*cols over blocks

  const MatrixBlock& block(int i) const { return blocks[static_cast<std::size_t>(i)]; }
  int block_count() const { return static_cast<int>(blocks.size()); }
};

// Per-block real matrices with entries in [0,1].
struct ContinuousAction {
  std::vector<Matrix> blocks;
};

// Per-block binary matrices satisfying the block discretizer's shape rules.
struct DiscreteArch {
  std::vector<BinaryMatrix> blocks;

  bool operator==(const DiscreteArch& o) const { return blocks == o.blocks; }
};

// Builds one of the named spaces. `edges`/`ops` apply to "synthetic" only.
SearchSpaceSpec builtin_space(const std::string& name, int edges = 0, int ops = 0);

// Validates block structure and recomputes total_dim; throws on bad specs.
void validate_space(const SearchSpaceSpec& space);

BinaryMatrix discretize_row_argmax(const Matrix& m);
BinaryMatrix discretize_darts(const Matrix& m, int node_count);
DiscreteArch discretize(const SearchSpaceSpec& space, const ContinuousAction& a);

// Canonical key: "block:row=op" segments joined by '|'; all-zero rows skipped.
std::string arch_key(const SearchSpaceSpec& space, const DiscreteArch& arch);
DiscreteArch parse_arch_key(const SearchSpaceSpec& space, const std::string& key);

// NAS-Bench-201 interchange string, e.g.
// "|nor_conv_3x3~0|+|skip_connect~0|none~1|+|none~0|none~1|skip_connect~2|"
std::string nb201_arch_str(const SearchSpaceSpec& space, const DiscreteArch& arch);
DiscreteArch parse_nb201_arch_str(const SearchSpaceSpec& space, const std::string& s);

// I.i.d. Uniform(0,1) entries, filled block by block in row-major order.
ContinuousAction random_action(const SearchSpaceSpec& space, Rng& rng);

// Uniform random *valid* discrete architecture (random-search baseline).
DiscreteArch random_arch(const SearchSpaceSpec& space, Rng& rng);

// Block-major, row-major within block. unflatten throws on length mismatch.
std::vector<double> flatten(const SearchSpaceSpec& space, const ContinuousAction& a);
ContinuousAction unflatten(const SearchSpaceSpec& space, const std::vector<double>& v);

// Number of distinct architectures in the space (as double; spaces can be huge).
double arch_count(const SearchSpaceSpec& space);

// Visits every architecture of the space in a deterministic order. The
// callback may return false to stop early. Intended for enumerable spaces.
void for_each_arch(const SearchSpaceSpec& space,
                   const std::function<bool(const DiscreteArch&)>& fn);

void check_action_shape(const SearchSpaceSpec& space, const ContinuousAction& a);
void check_arch_shape(const SearchSpaceSpec& space, const DiscreteArch& arch);

// True when every block agrees on rows, cols, discretizer and node count;
// names and op labels are ignored.
bool same_space_shape(const SearchSpaceSpec& a, const SearchSpaceSpec& b);

}  // namespace l2nas

#endif  // L2NAS_SPACE_HPP
