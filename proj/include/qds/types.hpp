// types.hpp: scalar/matrix aliases, tolerances and error types shared by all modules

#pragma once

#include <Eigen/Dense>

#include <complex>
#include <cstdint>
#include <map>
#include <random>
#include <stdexcept>
#include <string>

namespace qds {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealMatrix = Eigen::MatrixXd;
using Index = Eigen::Index;

// Every randomized routine takes the generator explicitly; there is no global state.
using Rng = std::mt19937_64;

inline constexpr std::uint64_t kDefaultSeed = 0x0D51;

struct Tolerances {
    double rank_tol = 1e-9;   // relative singular-value / eigenvalue cutoff
    double alg_tol = 1e-8;    // residual norm for algebraic identities
    double conv_tol = 1e-10;  // iteration convergence

    void validate() const {
        if (!(rank_tol > 0.0) || !(alg_tol > 0.0) || !(conv_tol > 0.0))
            throw std::invalid_argument("tolerances must be strictly positive");
        if (!(rank_tol < 1.0))
            throw std::invalid_argument("rank_tol must be < 1");
    }
};

// Malformed input: wrong shapes, non-finite entries, wrong model kind.
class StructuralError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// A numerical certificate failed; carries the residuals that triggered it.
class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& what,
                            std::map<std::string, double> residuals = {})
        : std::runtime_error(what), residuals_(std::move(residuals)) {}

    const std::map<std::string, double>& residuals() const noexcept { return residuals_; }

private:
    std::map<std::string, double> residuals_;
};

} // namespace qds
