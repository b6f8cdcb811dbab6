#include <Eigen/CholmodSupport>

#include <cmath>
#include <vector>

int main()
{
    using Matrix = Eigen::SparseMatrix<double>;
    const int n = 120;
    std::vector<Eigen::Triplet<double>> t;
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
            const int k = j * n + i;
            t.emplace_back(k, k, 201.0);
            if (i > 0) t.emplace_back(k, k - 1, -50.0);
            if (i < n - 1) t.emplace_back(k, k + 1, -50.0);
            if (j > 0) t.emplace_back(k, k - n, -50.0);
            if (j < n - 1) t.emplace_back(k, k + n, -50.0);
        }
    Matrix a(n * n, n * n);
    a.setFromTriplets(t.begin(), t.end());
    Eigen::VectorXd x(a.rows());
    for (Eigen::Index i = 0; i < x.size(); ++i) x[i] = std::sin(0.37 * static_cast<double>(i)) + 2.0;
    Eigen::CholmodSupernodalLLT<Matrix> s(a);
    if (s.info() != Eigen::Success) return 1;
    const Eigen::VectorXd y = s.solve(a * x);
    return y.allFinite() && (y - x).lpNorm<Eigen::Infinity>() < 1e-8 ? 0 : 1;
}
