#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <vector>

namespace qoct {

using cplx = std::complex<double>;

/// Three-channel nuclear wavepacket sampled on the spatial grid at one time.
/// channels[i-1] holds chi_i for i = 1..3.
struct WavepacketState {
  std::array<std::vector<cplx>, 3> channels;
  double time = 0.0;

  static WavepacketState zero(std::size_t n) {
    WavepacketState s;
    for (auto& c : s.channels) c.assign(n, cplx{0.0, 0.0});
    return s;
  }

  std::size_t size() const { return channels[0].size(); }
};

/// <chi_i|chi_i> with the grid measure dr, i in 1..3.
inline double channel_norm(const WavepacketState& s, int i, double dr) {
  double acc = 0.0;
  for (const cplx& z : s.channels[static_cast<std::size_t>(i - 1)]) acc += std::norm(z);
  return acc * dr;
}

inline double total_norm(const WavepacketState& s, double dr) {
  return channel_norm(s, 1, dr) + channel_norm(s, 2, dr) + channel_norm(s, 3, dr);
}

}  // namespace qoct
