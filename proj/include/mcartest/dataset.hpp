#ifndef MCARTEST_DATASET_HPP
#define MCARTEST_DATASET_HPP

#include <Eigen/Dense>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace mcar {

using MaskMatrix = Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>;

// n×d numeric table with an explicit observation mask (true = observed).
// Values under a false mask entry are placeholders and are never read.
class Dataset {
 public:
  Dataset() = default;
  Dataset(Eigen::MatrixXd values, MaskMatrix mask, std::vector<std::string> names);

  // Fully observed dataset with default names V1..Vd.
  static Dataset complete(Eigen::MatrixXd values);

  Eigen::Index rows() const { return values_.rows(); }
  Eigen::Index cols() const { return values_.cols(); }

  const Eigen::MatrixXd& values() const { return values_; }
  const MaskMatrix& mask() const { return mask_; }
  const std::vector<std::string>& column_names() const { return names_; }

  bool observed(Eigen::Index i, Eigen::Index j) const { return mask_(i, j); }
  Eigen::Index missing_count(Eigen::Index j) const;
  Eigen::Index missing_count() const;

  // Used by the amputation mechanisms.
  void set_missing(Eigen::Index i, Eigen::Index j) { mask_(i, j) = false; }

  int column_index(const std::string& name) const;  // -1 if absent

 private:
  Eigen::MatrixXd values_;
  MaskMatrix mask_;
  std::vector<std::string> names_;
};

struct ColumnRoles {
  std::vector<int> complete;    // X^(1..p)
  std::vector<int> incomplete;  // Y^(1..q)

  int p() const { return static_cast<int>(complete.size()); }
  int q() const { return static_cast<int>(incomplete.size()); }
};

// Complete columns are those with no missing cell; the rest are incomplete.
ColumnRoles infer_roles(const Dataset& ds);

// Throws DataError if roles overlap, miss a column, reference a complete
// column that has missing cells, or p == 0.
void validate_roles(const Dataset& ds, const ColumnRoles& roles);

// Parses "X1,X2:Y1" (names or 1-based indices) against the dataset header.
ColumnRoles parse_roles(const Dataset& ds, const std::string& spec);

// n×q 0/1 response indicators in the order of roles.incomplete.
Eigen::MatrixXd response_matrix(const Dataset& ds, const ColumnRoles& roles);

// Complete columns as an n×p matrix.
Eigen::MatrixXd complete_block(const Dataset& ds, const ColumnRoles& roles);

struct CsvOptions {
  std::vector<std::string> na_tokens{"NA", "NaN", ""};
};

struct LoadedData {
  Dataset data;
  ColumnRoles roles;
};

Dataset read_csv(std::istream& in, const CsvOptions& opts = {});
Dataset read_csv(const std::filesystem::path& path, const CsvOptions& opts = {});

// Reads and assigns roles (inferred unless given). Rejects datasets without a
// complete column and columns that are entirely missing.
LoadedData load_csv(const std::filesystem::path& path, const CsvOptions& opts = {},
                    const std::optional<std::string>& roles = std::nullopt);

void write_csv(const Dataset& ds, std::ostream& out, const std::string& na_token = "NA");
void write_csv(const Dataset& ds, const std::filesystem::path& path,
               const std::string& na_token = "NA");

// Shortest round-trippable decimal form of a double.
std::string format_double(double v);

}  // namespace mcar

#endif
