#pragma once

#include <compare>
#include <cstdint>
#include <limits>
#include <ostream>

namespace specsched {

// Simulated time in integer microsecond ticks. Addition is exact, so replays
// never drift. Values are non-negative except transiently inside subtraction.
class SimTime {
 public:
  constexpr SimTime() = default;

  static constexpr SimTime from_us(std::int64_t us) { return SimTime(us); }
  static SimTime from_ms(double ms);
  static constexpr SimTime zero() { return SimTime(0); }
  static constexpr SimTime infinity() {
    return SimTime(std::numeric_limits<std::int64_t>::max());
  }

  constexpr std::int64_t us() const { return us_; }
  constexpr double ms() const { return static_cast<double>(us_) / 1000.0; }
  constexpr bool is_infinite() const { return *this == infinity(); }

  constexpr SimTime& operator+=(SimTime other) {
    us_ += other.us_;
    return *this;
  }
  constexpr SimTime& operator-=(SimTime other) {
    us_ -= other.us_;
    return *this;
  }
  friend constexpr SimTime operator+(SimTime a, SimTime b) { return a += b; }
  friend constexpr SimTime operator-(SimTime a, SimTime b) { return a -= b; }
  friend constexpr SimTime operator*(std::int64_t k, SimTime t) {
    return SimTime(k * t.us_);
  }
  friend constexpr SimTime operator*(SimTime t, std::int64_t k) { return k * t; }

  friend constexpr auto operator<=>(SimTime, SimTime) = default;

 private:
  constexpr explicit SimTime(std::int64_t us) : us_(us) {}
  std::int64_t us_ = 0;
};

inline namespace literals {
constexpr SimTime operator""_us(unsigned long long v) {
  return SimTime::from_us(static_cast<std::int64_t>(v));
}
constexpr SimTime operator""_ms(unsigned long long v) {
  return SimTime::from_us(static_cast<std::int64_t>(v) * 1000);
}
}  // namespace literals

std::ostream& operator<<(std::ostream& os, SimTime t);

}  // namespace specsched
