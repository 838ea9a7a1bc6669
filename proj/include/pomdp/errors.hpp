#pragma once

#include <stdexcept>
#include <string>

namespace pomdp {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Model validation
struct NonStochasticRow : Error { using Error::Error; };
struct NegativeProbability : Error { using Error::Error; };
struct DimensionMismatch : Error { using Error::Error; };
struct NonFiniteReward : Error { using Error::Error; };
struct ProductTooLarge : Error { using Error::Error; };

// Solvers
struct BasisSingular : Error { using Error::Error; };
struct MissingVariable : Error { using Error::Error; };
struct NonIntegralIncumbent : Error { using Error::Error; };

// Oracles
struct SearchSpaceTooLarge : Error { using Error::Error; };

// Files
struct IoError : Error { using Error::Error; };

}  // namespace pomdp
