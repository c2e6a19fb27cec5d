#pragma once

// Eigen NumTraits for boost cpp_bin_float numbers. Boost's own adapter predates
// Eigen 3.4 and lacks infinity()/quiet_NaN().

#include <Eigen/Core>
#include <boost/multiprecision/cpp_bin_float.hpp>

#include <limits>

namespace wfspec {

template <unsigned Bits>
using ExtendedReal = boost::multiprecision::number<
    boost::multiprecision::cpp_bin_float<Bits, boost::multiprecision::digit_base_2>,
    boost::multiprecision::et_off>;

}  // namespace wfspec

namespace Eigen {

template <unsigned Bits>
struct NumTraits<wfspec::ExtendedReal<Bits>> : GenericNumTraits<wfspec::ExtendedReal<Bits>> {
  using T = wfspec::ExtendedReal<Bits>;
  using Real = T;
  using NonInteger = T;
  using Nested = T;
  using Literal = T;
  enum {
    IsComplex = 0,
    IsInteger = 0,
    IsSigned = 1,
    RequireInitialization = 1,
    ReadCost = 4,
    AddCost = 16,
    MulCost = 16
  };
  static Real epsilon() { return std::numeric_limits<T>::epsilon(); }
  static Real dummy_precision() { return 1000 * epsilon(); }
  static Real highest() { return (std::numeric_limits<T>::max)(); }
  static Real lowest() { return (std::numeric_limits<T>::lowest)(); }
  static Real infinity() { return std::numeric_limits<T>::infinity(); }
  static Real quiet_NaN() { return std::numeric_limits<T>::quiet_NaN(); }
  static int digits10() { return std::numeric_limits<T>::digits10; }
};

}  // namespace Eigen
