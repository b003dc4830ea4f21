#pragma once

#include "cloudsched/core.hpp"

#include <string>

namespace testing_support {

using cloudsched::Job;
using cloudsched::MachineParams;
using cloudsched::Rational;
using cloudsched::Time;

// Both operands of every comparison must be Rational: boost's mixed
// int == rational overload recurses under C++20 comparison rewriting.
inline Rational R(std::int64_t num, std::int64_t den = 1) { return Rational(num, den); }

inline Job job(std::string id, Rational release, Rational deadline, Rational size_a, Rational size_b) {
  return Job{std::move(id), release, deadline, size_a, size_b};
}

inline MachineParams params(Rational setup_a, Rational setup_b, Rational cost_b) {
  return MachineParams::make(setup_a, setup_b, cost_b);
}

}  // namespace testing_support
