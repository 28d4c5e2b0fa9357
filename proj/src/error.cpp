#include "fmmc/error.hpp"

#include <sstream>

namespace fmmc {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument:
      return "invalid-argument";
    case ErrorKind::InfeasibleWeights:
      return "infeasible-weights";
    case ErrorKind::NotReversible:
      return "not-reversible";
    case ErrorKind::NotReducible:
      return "not-reducible";
    case ErrorKind::WrongRegime:
      return "wrong-regime";
    case ErrorKind::InfeasibleFixedWeight:
      return "infeasible-fixed-weight";
    case ErrorKind::TooLarge:
      return "too-large";
    case ErrorKind::ReducibleChain:
      return "reducible-chain";
  }
  return "unknown";
}

namespace {

std::string budget_message(std::size_t vertex, double deficit) {
  std::ostringstream os;
  os.precision(17);
  os << "infeasible-weights: budget at vertex " << vertex << " exceeded by "
     << deficit;
  return os.str();
}

std::string fixed_weight_message(std::size_t blade, double weight,
                                 double limit) {
  std::ostringstream os;
  os.precision(17);
  os << "infeasible-fixed-weight: blade " << blade << " weight " << weight
     << " outside [0, " << limit << "]";
  return os.str();
}

}  // namespace

InfeasibleWeights::InfeasibleWeights(std::size_t vertex, double deficit)
    : Error(ErrorKind::InfeasibleWeights, budget_message(vertex, deficit)),
      vertex_(vertex),
      deficit_(deficit) {}

NotReducible::NotReducible(std::size_t blade)
    : Error(ErrorKind::NotReducible,
            "not-reducible: ratio condition fails at blade " +
                std::to_string(blade)),
      blade_(blade) {}

InfeasibleFixedWeight::InfeasibleFixedWeight(std::size_t blade, double weight,
                                             double limit)
    : Error(ErrorKind::InfeasibleFixedWeight,
            fixed_weight_message(blade, weight, limit)),
      blade_(blade) {}

}  // namespace fmmc
