#include "l2nas/space.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>

namespace l2nas {

namespace {

int darts_rows_for(int node_count) {
  int rows = 0;
  for (int k = 0; k < node_count; ++k) rows += k + 2;
  return rows;
}

const std::vector<std::string> kNb201Ops = {
    "none", "skip_connect", "avg_pool_3x3", "nor_conv_1x1", "nor_conv_3x3"};

const std::vector<std::string> kDartsOps = {
    "max_pool_3x3", "avg_pool_3x3",  "skip_connect", "sep_conv_3x3",
    "sep_conv_5x5", "dil_conv_3x3",  "dil_conv_5x5"};

std::vector<std::string> ofa_op_names() {
  std::vector<std::string> names;
  for (int e : {3, 4, 6})
    for (int k : {3, 5, 7})
      names.push_back("mbconv_e" + std::to_string(e) + "_k" + std::to_string(k));
  return names;
}

std::vector<std::string> generic_op_names(int ops) {
  std::vector<std::string> names;
  for (int o = 0; o < ops; ++o) names.push_back("op" + std::to_string(o));
  return names;
}

void finalize(SearchSpaceSpec& space) {
  space.total_dim = 0;
  for (const auto& b : space.blocks) space.total_dim += b.rows * b.cols;
  validate_space(space);
}

}  // namespace

void validate_space(const SearchSpaceSpec& space) {
  if (space.blocks.empty())
    throw std::invalid_argument("space '" + space.name + "' has no blocks");
  int dim = 0;
  for (std::size_t i = 0; i < space.blocks.size(); ++i) {
    const auto& b = space.blocks[i];
    if (b.rows < 1 || b.cols < 2)
      throw std::invalid_argument("space '" + space.name + "' block " +
                                  std::to_string(i) + " needs rows >= 1, cols >= 2");
    if (b.op_names.size() != static_cast<std::size_t>(b.cols))
      throw std::invalid_argument("space '" + space.name + "' block " +
                                  std::to_string(i) + " op_names size mismatch");
    if (b.discretizer == Discretizer::kDartsTop2 &&
        b.rows != darts_rows_for(b.node_count))
      throw std::invalid_argument(
          "space '" + space.name + "' block " + std::to_string(i) +
          ": rows must equal sum of (k+2) over " + std::to_string(b.node_count) +
          " nodes");
    dim += b.rows * b.cols;
  }
  if (dim != space.total_dim)
    throw std::invalid_argument("space '" + space.name + "' total_dim mismatch");
}

SearchSpaceSpec builtin_space(const std::string& name, int edges, int ops) {
  SearchSpaceSpec space;
  space.name = name;
  if (name == "nb201") {
    space.blocks.push_back({6, 5, kNb201Ops, Discretizer::kRowArgmax, 0});
  } else if (name == "darts") {
    MatrixBlock cell{14, 7, kDartsOps, Discretizer::kDartsTop2, 4};
    space.blocks.push_back(cell);  // normal cell
    space.blocks.push_back(cell);  // reduction cell
  } else if (name == "ofa_mbv3") {
    space.blocks.push_back({20, 9, ofa_op_names(), Discretizer::kRowArgmax, 0});
    space.blocks.push_back(
        {5, 3, {"depth_2", "depth_3", "depth_4"}, Discretizer::kRowArgmax, 0});
  } else if (name == "synthetic") {
    if (edges < 1 || ops < 2)
      throw std::invalid_argument("synthetic space needs edges >= 1, ops >= 2");
    space.blocks.push_back(
        {edges, ops, generic_op_names(ops), Discretizer::kRowArgmax, 0});
  } else {
    throw std::invalid_argument("unknown space name: '" + name + "'");
  }
  finalize(space);
  return space;
}

BinaryMatrix discretize_row_argmax(const Matrix& m) {
  if (m.rows < 1 || m.cols < 1)
    throw std::invalid_argument("discretize_row_argmax: empty matrix");
  BinaryMatrix out(m.rows, m.cols);
  for (int r = 0; r < m.rows; ++r) {
    int best = 0;
    for (int c = 1; c < m.cols; ++c)
      if (m.at(r, c) > m.at(r, best)) best = c;  // ties keep lowest index
    out.at(r, best) = 1;
  }
  return out;
}

BinaryMatrix discretize_darts(const Matrix& m, int node_count) {
  if (m.rows != darts_rows_for(node_count))
    throw std::invalid_argument("discretize_darts: matrix has " +
                                std::to_string(m.rows) + " rows, expected " +
                                std::to_string(darts_rows_for(node_count)));
  BinaryMatrix out(m.rows, m.cols);
  int start = 0;
  for (int k = 0; k < node_count; ++k) {
    const int band = k + 2;
    // First pick: band-wide maximum, ties to lowest (row, col).
    int i1 = start, j1 = 0;
    for (int r = start; r < start + band; ++r)
      for (int c = 0; c < m.cols; ++c)
        if (m.at(r, c) > m.at(i1, j1)) { i1 = r; j1 = c; }
    // Second pick: maximum over the remaining rows.
    int i2 = -1, j2 = -1;
    for (int r = start; r < start + band; ++r) {
      if (r == i1) continue;
      for (int c = 0; c < m.cols; ++c)
        if (i2 < 0 || m.at(r, c) > m.at(i2, j2)) { i2 = r; j2 = c; }
    }
    out.at(i1, j1) = 1;
    out.at(i2, j2) = 1;
    start += band;
  }
  return out;
}

DiscreteArch discretize(const SearchSpaceSpec& space, const ContinuousAction& a) {
  check_action_shape(space, a);
  DiscreteArch arch;
  for (int i = 0; i < space.block_count(); ++i) {
    const auto& b = space.block(i);
    if (b.discretizer == Discretizer::kRowArgmax)
      arch.blocks.push_back(discretize_row_argmax(a.blocks[i]));
    else
      arch.blocks.push_back(discretize_darts(a.blocks[i], b.node_count));
  }
  return arch;
}

void check_action_shape(const SearchSpaceSpec& space, const ContinuousAction& a) {
  if (a.blocks.size() != space.blocks.size())
    throw std::invalid_argument("action block count mismatch");
  for (int i = 0; i < space.block_count(); ++i)
    if (a.blocks[i].rows != space.block(i).rows ||
        a.blocks[i].cols != space.block(i).cols)
      throw std::invalid_argument("action block " + std::to_string(i) +
                                  " shape mismatch");
}

void check_arch_shape(const SearchSpaceSpec& space, const DiscreteArch& arch) {
  if (arch.blocks.size() != space.blocks.size())
    throw std::invalid_argument("arch block count mismatch");
  for (int i = 0; i < space.block_count(); ++i) {
    const auto& b = space.block(i);
    const auto& m = arch.blocks[i];
    if (m.rows != b.rows || m.cols != b.cols)
      throw std::invalid_argument("arch block " + std::to_string(i) +
                                  " shape mismatch");
    if (b.discretizer == Discretizer::kRowArgmax) {
      for (int r = 0; r < m.rows; ++r)
        if (m.row_sum(r) != 1)
          throw std::invalid_argument("arch block " + std::to_string(i) + " row " +
                                      std::to_string(r) + " must have exactly one op");
    } else {
      int start = 0;
      for (int k = 0; k < b.node_count; ++k) {
        const int band = k + 2;
        int active_rows = 0, ones = 0;
        for (int r = start; r < start + band; ++r) {
          const int s = m.row_sum(r);
          if (s > 1)
            throw std::invalid_argument("arch block " + std::to_string(i) + " row " +
                                        std::to_string(r) + " has multiple ops");
          active_rows += (s == 1);
          ones += s;
        }
        if (active_rows != 2 || ones != 2)
          throw std::invalid_argument("arch block " + std::to_string(i) + " node " +
                                      std::to_string(k) +
                                      " must select exactly 2 edges");
        start += band;
      }
    }
  }
}

std::string arch_key(const SearchSpaceSpec& space, const DiscreteArch& arch) {
  check_arch_shape(space, arch);
  std::string key;
  for (int i = 0; i < space.block_count(); ++i) {
    const auto& m = arch.blocks[i];
    for (int r = 0; r < m.rows; ++r) {
      int op = -1;
      for (int c = 0; c < m.cols; ++c)
        if (m.at(r, c)) { op = c; break; }
      if (op < 0) continue;  // all-zero rows are skipped
      if (!key.empty()) key += '|';
      key += std::to_string(i) + ':' + std::to_string(r) + '=' + std::to_string(op);
    }
  }
  return key;
}

namespace {

int parse_int(const std::string& s, const std::string& what) {
  if (s.empty() || s.size() > 8 ||
      s.find_first_not_of("0123456789") != std::string::npos)
    throw std::invalid_argument("arch key: bad " + what + " '" + s + "'");
  return std::stoi(s);
}

}  // namespace

DiscreteArch parse_arch_key(const SearchSpaceSpec& space, const std::string& key) {
  DiscreteArch arch;
  for (const auto& b : space.blocks)
    arch.blocks.emplace_back(b.rows, b.cols);

  std::stringstream ss(key);
  std::string seg;
  while (std::getline(ss, seg, '|')) {
    const auto colon = seg.find(':');
    const auto eq = seg.find('=');
    if (colon == std::string::npos || eq == std::string::npos || eq < colon)
      throw std::invalid_argument("arch key: malformed segment '" + seg + "'");
    const int blk = parse_int(seg.substr(0, colon), "block index");
    const int row = parse_int(seg.substr(colon + 1, eq - colon - 1), "row index");
    const int op = parse_int(seg.substr(eq + 1), "op index");
    if (blk >= space.block_count() || row >= space.block(blk).rows ||
        op >= space.block(blk).cols)
      throw std::invalid_argument("arch key: segment '" + seg + "' out of range");
    if (arch.blocks[blk].row_sum(row) != 0)
      throw std::invalid_argument("arch key: duplicate row in '" + seg + "'");
    arch.blocks[blk].at(row, op) = 1;
  }
  check_arch_shape(space, arch);  // rejects keys that skip mandatory rows
  return arch;
}

namespace {

void require_nb201_shape(const SearchSpaceSpec& space) {
  if (space.block_count() != 1 || space.block(0).rows != 6 ||
      space.block(0).cols != 5 ||
      space.block(0).discretizer != Discretizer::kRowArgmax)
    throw std::invalid_argument("nb201 arch string requires the nb201 space");
}

}  // namespace

std::string nb201_arch_str(const SearchSpaceSpec& space, const DiscreteArch& arch) {
  require_nb201_shape(space);
  check_arch_shape(space, arch);
  const auto& ops = space.block(0).op_names;
  const auto& m = arch.blocks[0];
  std::string s;
  int row = 0;
  // Destination nodes 1..3; node d has d incoming edges from nodes 0..d-1.
  for (int dest = 1; dest <= 3; ++dest) {
    if (dest > 1) s += '+';
    s += '|';
    for (int src = 0; src < dest; ++src, ++row) {
      int op = 0;
      for (int c = 0; c < m.cols; ++c)
        if (m.at(row, c)) op = c;
      s += ops[op] + '~' + std::to_string(src) + '|';
    }
  }
  return s;
}

DiscreteArch parse_nb201_arch_str(const SearchSpaceSpec& space, const std::string& s) {
  require_nb201_shape(space);
  const auto& ops = space.block(0).op_names;
  DiscreteArch arch;
  arch.blocks.emplace_back(6, 5);

  std::vector<std::string> groups;
  std::stringstream ss(s);
  std::string g;
  while (std::getline(ss, g, '+')) groups.push_back(g);
  if (groups.size() != 3)
    throw std::invalid_argument("nb201 arch string: expected 3 node groups");

  int row = 0;
  for (int dest = 1; dest <= 3; ++dest) {
    const std::string& grp = groups[dest - 1];
    if (grp.size() < 2 || grp.front() != '|' || grp.back() != '|')
      throw std::invalid_argument("nb201 arch string: group not '|'-delimited: '" +
                                  grp + "'");
    std::vector<std::string> toks;
    std::stringstream gs(grp.substr(1, grp.size() - 2));
    std::string tok;
    while (std::getline(gs, tok, '|')) toks.push_back(tok);
    if (static_cast<int>(toks.size()) != dest)
      throw std::invalid_argument("nb201 arch string: node " + std::to_string(dest) +
                                  " expects " + std::to_string(dest) + " edges");
    for (int src = 0; src < dest; ++src, ++row) {
      const auto tilde = toks[src].rfind('~');
      if (tilde == std::string::npos)
        throw std::invalid_argument("nb201 arch string: missing '~' in '" +
                                    toks[src] + "'");
      const std::string op_name = toks[src].substr(0, tilde);
      const std::string src_str = toks[src].substr(tilde + 1);
      if (src_str != std::to_string(src))
        throw std::invalid_argument("nb201 arch string: edge '" + toks[src] +
                                    "' has wrong source index");
      const auto it = std::find(ops.begin(), ops.end(), op_name);
      if (it == ops.end())
        throw std::invalid_argument("nb201 arch string: unknown op '" + op_name + "'");
      arch.blocks[0].at(row, static_cast<int>(it - ops.begin())) = 1;
    }
  }
  return arch;
}

ContinuousAction random_action(const SearchSpaceSpec& space, Rng& rng) {
  ContinuousAction a;
  for (const auto& b : space.blocks) {
    Matrix m(b.rows, b.cols);
    for (auto& v : m.data) v = rng.next_unit();
    a.blocks.push_back(std::move(m));
  }
  return a;
}

DiscreteArch random_arch(const SearchSpaceSpec& space, Rng& rng) {
  DiscreteArch arch;
  for (const auto& b : space.blocks) {
    BinaryMatrix m(b.rows, b.cols);
    if (b.discretizer == Discretizer::kRowArgmax) {
      for (int r = 0; r < b.rows; ++r)
        m.at(r, static_cast<int>(rng.next_below(b.cols))) = 1;
    } else {
      int start = 0;
      for (int k = 0; k < b.node_count; ++k) {
        const int band = k + 2;
        const int i1 = static_cast<int>(rng.next_below(band));
        int i2 = static_cast<int>(rng.next_below(band - 1));
        if (i2 >= i1) ++i2;
        m.at(start + i1, static_cast<int>(rng.next_below(b.cols))) = 1;
        m.at(start + i2, static_cast<int>(rng.next_below(b.cols))) = 1;
        start += band;
      }
    }
    arch.blocks.push_back(std::move(m));
  }
  return arch;
}

std::vector<double> flatten(const SearchSpaceSpec& space, const ContinuousAction& a) {
  check_action_shape(space, a);
  std::vector<double> v;
  v.reserve(space.total_dim);
  for (const auto& m : a.blocks) v.insert(v.end(), m.data.begin(), m.data.end());
  return v;
}

ContinuousAction unflatten(const SearchSpaceSpec& space, const std::vector<double>& v) {
  if (static_cast<int>(v.size()) != space.total_dim)
    throw std::invalid_argument("unflatten: vector length " +
                                std::to_string(v.size()) + " != total_dim " +
                                std::to_string(space.total_dim));
  ContinuousAction a;
  std::size_t off = 0;
  for (const auto& b : space.blocks) {
    Matrix m(b.rows, b.cols);
    std::copy(v.begin() + off, v.begin() + off + m.data.size(), m.data.begin());
    off += m.data.size();
    a.blocks.push_back(std::move(m));
  }
  return a;
}

bool same_space_shape(const SearchSpaceSpec& a, const SearchSpaceSpec& b) {
  if (a.blocks.size() != b.blocks.size()) return false;
  for (std::size_t i = 0; i < a.blocks.size(); ++i) {
    const auto& x = a.blocks[i];
    const auto& y = b.blocks[i];
    if (x.rows != y.rows || x.cols != y.cols || x.discretizer != y.discretizer ||
        x.node_count != y.node_count)
      return false;
  }
  return true;
}

double arch_count(const SearchSpaceSpec& space) {
  double count = 1.0;
  for (const auto& b : space.blocks) {
    if (b.discretizer == Discretizer::kRowArgmax) {
      for (int r = 0; r < b.rows; ++r) count *= b.cols;
    } else {
      for (int k = 0; k < b.node_count; ++k) {
        const int band = k + 2;
        count *= (band * (band - 1) / 2.0) * b.cols * b.cols;
      }
    }
  }
  return count;
}

namespace {

bool enumerate_block_rows(const MatrixBlock& b, BinaryMatrix& m, int row,
                          const std::function<bool()>& next) {
  if (row == b.rows) return next();
  for (int c = 0; c < b.cols; ++c) {
    m.at(row, c) = 1;
    if (!enumerate_block_rows(b, m, row + 1, next)) return false;
    m.at(row, c) = 0;
  }
  return true;
}

bool enumerate_block_nodes(const MatrixBlock& b, BinaryMatrix& m, int node,
                           int start, const std::function<bool()>& next) {
  if (node == b.node_count) return next();
  const int band = node + 2;
  for (int i1 = 0; i1 < band; ++i1)
    for (int i2 = i1 + 1; i2 < band; ++i2)
      for (int o1 = 0; o1 < b.cols; ++o1)
        for (int o2 = 0; o2 < b.cols; ++o2) {
          m.at(start + i1, o1) = 1;
          m.at(start + i2, o2) = 1;
          if (!enumerate_block_nodes(b, m, node + 1, start + band, next))
            return false;
          m.at(start + i1, o1) = 0;
          m.at(start + i2, o2) = 0;
        }
  return true;
}

bool enumerate_blocks(const SearchSpaceSpec& space, DiscreteArch& arch, int blk,
                      const std::function<bool(const DiscreteArch&)>& fn) {
  if (blk == space.block_count()) return fn(arch);
  const auto& b = space.block(blk);
  const auto next = [&] { return enumerate_blocks(space, arch, blk + 1, fn); };
  if (b.discretizer == Discretizer::kRowArgmax)
    return enumerate_block_rows(b, arch.blocks[blk], 0, next);
  return enumerate_block_nodes(b, arch.blocks[blk], 0, 0, next);
}

}  // namespace

void for_each_arch(const SearchSpaceSpec& space,
                   const std::function<bool(const DiscreteArch&)>& fn) {
  DiscreteArch arch;
  for (const auto& b : space.blocks) arch.blocks.emplace_back(b.rows, b.cols);
  enumerate_blocks(space, arch, 0, fn);
}

}  // namespace l2nas
