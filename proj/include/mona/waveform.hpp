#pragma once

#include <cmath>
#include <string>

#include "mona/types.hpp"

namespace mona {

/// Time-dependent source value: dc A, sin A w, cos A w, square A w.
struct Waveform {
    enum class Kind { Dc, Sin, Cos, Square };

    Kind kind = Kind::Dc;
    Real amplitude = 0.0;
    Real omega = 0.0;  // unused for Dc

    [[nodiscard]] Real operator()(Real t) const {
        switch (kind) {
            case Kind::Dc:
                return amplitude;
            case Kind::Sin:
                return amplitude * std::sin(omega * t);
            case Kind::Cos:
                return amplitude * std::cos(omega * t);
            case Kind::Square: {
                const Real s = std::sin(omega * t);
                return amplitude * static_cast<Real>((s > 0) - (s < 0));
            }
        }
        return 0.0;
    }

    /// Time derivative; a square wave is flat almost everywhere, so its
    /// rate is taken as 0 (the jumps carry no usable slope information).
    [[nodiscard]] Real rate(Real t) const {
        switch (kind) {
            case Kind::Dc:
            case Kind::Square:
                return 0.0;
            case Kind::Sin:
                return amplitude * omega * std::cos(omega * t);
            case Kind::Cos:
                return -amplitude * omega * std::sin(omega * t);
        }
        return 0.0;
    }

    bool operator==(const Waveform&) const = default;
};

std::string to_string(const Waveform& w);

}  // namespace mona
