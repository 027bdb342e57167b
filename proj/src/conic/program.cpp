#include "gridcomp/conic/program.hpp"

#include <numeric>

#include "gridcomp/errors.hpp"

namespace gridcomp::conic {

int ConeDims::total() const {
  return zero + nonneg + std::accumulate(soc.begin(), soc.end(), 0);
}

Slice SliceMap::add(const std::string& name, int length) {
  if (length < 0) throw InvalidArgument("negative slice length for " + name);
  if (slices_.count(name)) throw InvalidArgument("duplicate slice name " + name);
  Slice s{size_, length};
  slices_.emplace(name, s);
  size_ += length;
  return s;
}

const Slice& SliceMap::at(const std::string& name) const {
  auto it = slices_.find(name);
  if (it == slices_.end()) throw InvalidArgument("unknown slice " + name);
  return it->second;
}

void ConicProgram::validate() const {
  const int n = num_vars();
  const int m = num_rows();
  if (A.rows() != m || A.cols() != n) throw InvalidArgument("ConicProgram: A shape mismatch");
  if (cones.total() != m) throw InvalidArgument("ConicProgram: cone dims do not sum to rows of A");
  for (int d : cones.soc)
    if (d < 1) throw InvalidArgument("ConicProgram: empty second-order cone");
  if (vars.size() != n) throw InvalidArgument("ConicProgram: variable map does not cover x");
  std::vector<char> covered(static_cast<std::size_t>(n), 0);
  for (const auto& [name, s] : vars.entries()) {
    for (int i = 0; i < s.length; ++i) {
      if (covered[static_cast<std::size_t>(s[i])])
        throw InvalidArgument("ConicProgram: overlapping variable slice " + name);
      covered[static_cast<std::size_t>(s[i])] = 1;
    }
  }
  if (!c.allFinite() || !b.allFinite()) throw InvalidArgument("ConicProgram: non-finite data");
}

void ConicProgram::dump_triplets(std::ostream& os) const {
  os.precision(17);
  os << num_vars() << ' ' << num_rows() << ' ' << cones.zero << ' ' << cones.nonneg;
  for (int d : cones.soc) os << ' ' << d;
  os << "\nc\n";
  for (int j = 0; j < num_vars(); ++j)
    if (c[j] != 0.0) os << j << ' ' << c[j] << '\n';
  os << "b\n";
  for (int i = 0; i < num_rows(); ++i)
    if (b[i] != 0.0) os << i << ' ' << b[i] << '\n';
  os << "A\n";
  for (int i = 0; i < A.outerSize(); ++i)
    for (SparseRowMatrix::InnerIterator it(A, i); it; ++it)
      os << i << ' ' << it.col() << ' ' << it.value() << '\n';
}

Slice ProgramBuilder::add_vars(const std::string& name, int length) {
  return vars_.add(name, length);
}

void ProgramBuilder::set_cost(int index, double value) { costs_.emplace_back(index, value); }

void ProgramBuilder::add_zero(AffineExpr expr, const std::string& name) {
  zero_.push_back({std::move(expr), name});
}

void ProgramBuilder::add_nonneg(AffineExpr expr, const std::string& name) {
  nonneg_.push_back({std::move(expr), name});
}

void ProgramBuilder::add_soc(std::vector<AffineExpr> rows, const std::string& name) {
  if (rows.empty()) throw InvalidArgument("add_soc: empty cone");
  std::vector<Row> block;
  block.reserve(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i)
    block.push_back({std::move(rows[i]), i == 0 ? name : std::string{}});
  soc_.push_back(std::move(block));
}

ConicProgram ProgramBuilder::finish() && {
  ConicProgram prog;
  const int n = vars_.size();
  prog.c = Eigen::VectorXd::Zero(n);
  for (auto [j, v] : costs_) {
    if (j < 0 || j >= n) throw InvalidArgument("cost index out of range");
    prog.c[j] += v;
  }
  prog.offset = offset_;
  prog.cones.zero = static_cast<int>(zero_.size());
  prog.cones.nonneg = static_cast<int>(nonneg_.size());
  for (const auto& blk : soc_) prog.cones.soc.push_back(static_cast<int>(blk.size()));
  const int m = prog.cones.total();
  prog.b.resize(m);

  // s = b - A x, so a row expression (constant + terms) maps to b = constant, A = -terms.
  std::vector<Eigen::Triplet<double>> trips;
  int row = 0;
  auto emit = [&](const Row& r) {
    prog.b[row] = r.expr.constant;
    for (auto [j, v] : r.expr.terms) {
      if (j < 0 || j >= n) throw InvalidArgument("row term index out of range");
      trips.emplace_back(row, j, -v);
    }
    if (!r.name.empty()) prog.named_rows[r.name] = row;
    ++row;
  };
  for (const auto& r : zero_) emit(r);
  for (const auto& r : nonneg_) emit(r);
  for (const auto& blk : soc_)
    for (const auto& r : blk) emit(r);

  prog.A.resize(m, n);
  prog.A.setFromTriplets(trips.begin(), trips.end());
  prog.A.makeCompressed();
  prog.vars = std::move(vars_);
  return prog;
}

}  // namespace gridcomp::conic
