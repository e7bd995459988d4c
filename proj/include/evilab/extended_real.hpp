#pragma once

#include <compare>
#include <string>

namespace evilab {

/// Real number or a tagged +infinity. Never stores a float sentinel.
class ExtReal {
public:
    constexpr ExtReal(double v) noexcept : value_(v), infinite_(false) {}  // NOLINT(implicit)
    static constexpr ExtReal infinity() noexcept { return ExtReal(); }

    constexpr bool is_infinite() const noexcept { return infinite_; }
    constexpr bool is_finite() const noexcept { return !infinite_; }
    /// Throws DomainError on +infinity.
    double value() const;

    friend constexpr bool operator==(const ExtReal& a, const ExtReal& b) noexcept {
        return a.infinite_ == b.infinite_ && (a.infinite_ || a.value_ == b.value_);
    }
    friend constexpr std::partial_ordering operator<=>(const ExtReal& a, const ExtReal& b) noexcept {
        if (a.infinite_ || b.infinite_) return a.infinite_ <=> b.infinite_;
        return a.value_ <=> b.value_;
    }
    friend ExtReal operator+(const ExtReal& a, const ExtReal& b) noexcept {
        if (a.infinite_ || b.infinite_) return infinity();
        return ExtReal(a.value_ + b.value_);
    }

    std::string to_string() const;

private:
    constexpr ExtReal() noexcept : value_(0.0), infinite_(true) {}
    double value_;
    bool infinite_;
};

}  // namespace evilab
