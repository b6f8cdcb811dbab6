#pragma once

#include <Eigen/SparseCore>

#include <memory>
#include <string>

namespace isotherm::detail {

/// Sparse Cholesky for the SPD step matrices. Supernodal CHOLMOD when a
/// one-time self-test passes, simplicial otherwise (some BLAS builds return
/// garbage from the supernodal kernels).
class SpdSolver {
public:
    SpdSolver();
    ~SpdSolver();
    SpdSolver(SpdSolver&&) noexcept;
    SpdSolver& operator=(SpdSolver&&) noexcept;

    /// Reuses the symbolic analysis when the sparsity pattern is unchanged.
    void factor(const Eigen::SparseMatrix<double>& a);
    Eigen::VectorXd solve(const Eigen::VectorXd& b) const;
    const char* method() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

/// True when the supernodal factorization reproduces a known solution.
bool supernodal_factorization_healthy();

}  // namespace isotherm::detail
