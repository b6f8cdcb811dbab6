#include "linear_system.hpp"

#include "isotherm/error.hpp"

#include <Eigen/CholmodSupport>

#include <cmath>
#include <iostream>
#include <vector>

namespace isotherm::detail {

namespace {

using Matrix = Eigen::SparseMatrix<double>;

Matrix test_matrix(int n, double c)
{
    std::vector<Eigen::Triplet<double>> t;
    const int size = n * n;
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
            const int k = j * n + i;
            t.emplace_back(k, k, 1.0 + 4.0 * c);
            if (i > 0) t.emplace_back(k, k - 1, -c);
            if (i < n - 1) t.emplace_back(k, k + 1, -c);
            if (j > 0) t.emplace_back(k, k - n, -c);
            if (j < n - 1) t.emplace_back(k, k + n, -c);
        }
    Matrix a(size, size);
    a.setFromTriplets(t.begin(), t.end());
    return a;
}

bool check_supernodal()
{
    const Matrix a = test_matrix(120, 50.0);
    Eigen::VectorXd x(a.rows());
    for (Eigen::Index i = 0; i < x.size(); ++i) x[i] = std::sin(0.37 * static_cast<double>(i)) + 2.0;
    const Eigen::VectorXd b = a * x;
    Eigen::CholmodSupernodalLLT<Matrix> s;
    s.compute(a);
    if (s.info() != Eigen::Success) return false;
    const Eigen::VectorXd y = s.solve(b);
    if (!y.allFinite()) return false;
    return (y - x).lpNorm<Eigen::Infinity>() < 1e-8;
}

}  // namespace

bool supernodal_factorization_healthy()
{
    static const bool ok = [] {
        const bool good = check_supernodal();
        if (!good)
            std::cerr << "warning: supernodal Cholesky failed its self-test; using simplicial factorization "
                         "(set OPENBLAS_CORETYPE, see README)\n";
        return good;
    }();
    return ok;
}

struct SpdSolver::Impl {
    bool supernodal = true;
    Eigen::CholmodSupernodalLLT<Matrix> super;
    Eigen::CholmodSimplicialLLT<Matrix> simple;
    bool analyzed = false;
    Eigen::Index rows = -1;
    Eigen::Index nnz = -1;
};

SpdSolver::SpdSolver() : impl_(std::make_unique<Impl>()) { impl_->supernodal = supernodal_factorization_healthy(); }
SpdSolver::~SpdSolver() = default;
SpdSolver::SpdSolver(SpdSolver&&) noexcept = default;
SpdSolver& SpdSolver::operator=(SpdSolver&&) noexcept = default;

void SpdSolver::factor(const Matrix& a)
{
    Impl& s = *impl_;
    const bool same = s.analyzed && s.rows == a.rows() && s.nnz == a.nonZeros();
    if (s.supernodal) {
        if (!same) s.super.analyzePattern(a);
        s.super.factorize(a);
        if (s.super.info() != Eigen::Success) fail(ErrorKind::solver, "Cholesky factorization failed (matrix not positive definite?)");
    } else {
        if (!same) s.simple.analyzePattern(a);
        s.simple.factorize(a);
        if (s.simple.info() != Eigen::Success) fail(ErrorKind::solver, "Cholesky factorization failed (matrix not positive definite?)");
    }
    s.analyzed = true;
    s.rows = a.rows();
    s.nnz = a.nonZeros();
}

Eigen::VectorXd SpdSolver::solve(const Eigen::VectorXd& b) const
{
    Eigen::VectorXd x = impl_->supernodal ? Eigen::VectorXd(impl_->super.solve(b)) : Eigen::VectorXd(impl_->simple.solve(b));
    if (!x.allFinite()) fail(ErrorKind::solver, "linear solve produced non-finite values");
    return x;
}

const char* SpdSolver::method() const { return impl_->supernodal ? "cholmod-supernodal-llt" : "cholmod-simplicial-llt"; }

}  // namespace isotherm::detail
