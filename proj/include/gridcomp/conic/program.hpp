#pragma once

// Canonical conic program
//
//   minimize    c'x + offset
//   subject to  A x + s = b,   s in K
//
// where K is the product, in row order, of a zero cone (equalities), a
// nonnegative orthant and a list of second-order cones
// {(s0, s1) : s0 >= ||s1||}. Programs are assembled from affine row
// expressions through ProgramBuilder, which takes care of row ordering.

#include <Eigen/Dense>
#include <Eigen/SparseCore>
#include <map>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

namespace gridcomp::conic {

using SparseRowMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor, int>;

struct ConeDims {
  int zero = 0;
  int nonneg = 0;
  std::vector<int> soc;

  int total() const;
  // Barrier degree: one per nonnegative row, one per second-order cone.
  int degree() const { return nonneg + static_cast<int>(soc.size()); }
};

struct Slice {
  int offset = 0;
  int length = 0;
  int operator[](int i) const { return offset + i; }
};

// Named, non-overlapping slices that cover [0, size()).
class SliceMap {
 public:
  Slice add(const std::string& name, int length);
  const Slice& at(const std::string& name) const;
  bool contains(const std::string& name) const { return slices_.count(name) != 0; }
  int size() const { return size_; }
  const std::map<std::string, Slice>& entries() const { return slices_; }

 private:
  std::map<std::string, Slice> slices_;
  int size_ = 0;
};

struct ConicProgram {
  Eigen::VectorXd c;
  double offset = 0.0;
  SparseRowMatrix A;
  Eigen::VectorXd b;
  ConeDims cones;
  SliceMap vars;
  std::map<std::string, int> named_rows;

  int num_vars() const { return static_cast<int>(c.size()); }
  int num_rows() const { return static_cast<int>(b.size()); }

  // Throws InvalidArgument when cone dims, A, b, c or the variable map disagree.
  void validate() const;

  // Debug dump: a header line "vars rows zero nonneg soc..." followed by
  // sections "c", "b" and "A" ("i j value" triplets, 0-based).
  void dump_triplets(std::ostream& os) const;
};

// value = constant + sum coeff * x[index]
struct AffineExpr {
  double constant = 0.0;
  std::vector<std::pair<int, double>> terms;

  AffineExpr() = default;
  explicit AffineExpr(double c) : constant(c) {}
  AffineExpr& add(int index, double coeff) {
    if (coeff != 0.0) terms.emplace_back(index, coeff);
    return *this;
  }
  AffineExpr& shift(double c) {
    constant += c;
    return *this;
  }
};

class ProgramBuilder {
 public:
  Slice add_vars(const std::string& name, int length);
  void set_cost(int index, double value);
  void add_offset(double value) { offset_ += value; }

  // expr == 0
  void add_zero(AffineExpr expr, const std::string& name = {});
  // expr >= 0
  void add_nonneg(AffineExpr expr, const std::string& name = {});
  // rows[0] >= ||rows[1..]||
  void add_soc(std::vector<AffineExpr> rows, const std::string& name = {});

  int num_vars() const { return vars_.size(); }

  ConicProgram finish() &&;

 private:
  struct Row {
    AffineExpr expr;
    std::string name;
  };
  SliceMap vars_;
  std::vector<std::pair<int, double>> costs_;
  double offset_ = 0.0;
  std::vector<Row> zero_;
  std::vector<Row> nonneg_;
  std::vector<std::vector<Row>> soc_;
};

}  // namespace gridcomp::conic
