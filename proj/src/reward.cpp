#include "cforge/reward.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "cforge/io.hpp"

namespace cforge {

RewardLut RewardLut::build(const BuildConfig& cfg) {
  require(cfg.loss_bins > 0 && cfg.gain_bins > 0, "reward lut: bad bin counts");
  require(cfg.loss_max > 0 && cfg.gain_max > 0, "reward lut: bad axis ranges");
  RewardLut lut;
  lut.loss_bins = cfg.loss_bins;
  lut.gain_bins = cfg.gain_bins;
  lut.loss_max = cfg.loss_max;
  lut.gain_max = cfg.gain_max;
  lut.cells.assign(static_cast<size_t>(cfg.loss_bins) * cfg.gain_bins, 0.0);

  const double lw = cfg.loss_max / cfg.loss_bins;
  const double gw = cfg.gain_max / cfg.gain_bins;
  for (int li = 0; li < cfg.loss_bins; ++li) {
    const double loss = (li + 0.5) * lw;
    // weight profile: quadratic falloff in the usable region, linear
    // negative slope past the knee
    const double w = loss < cfg.high_loss_knee
                         ? 1.0 - (loss / cfg.high_loss_knee) * (loss / cfg.high_loss_knee)
                         : -0.5 * (loss / cfg.high_loss_knee);
    for (int gi = 0; gi < cfg.gain_bins; ++gi) {
      const double gain = (gi + 0.5) * gw;
      double r = (gain / 100.0) * w;
      // discourage near-no-op actions across the whole usable-loss region
      if (gain < cfg.low_gain_threshold && loss < cfg.high_loss_knee)
        r = cfg.low_action_penalty;
      lut.cells[static_cast<size_t>(li) * cfg.gain_bins + gi] = r;
    }
  }
  return lut;
}

int RewardLut::loss_bin(double loss_pct) const {
  require(!std::isnan(loss_pct), "reward lookup: NaN loss");
  loss_pct = std::clamp(loss_pct, 0.0, loss_max);
  const int b = static_cast<int>(std::floor(loss_pct / (loss_max / loss_bins)));
  return std::min(b, loss_bins - 1);
}

int RewardLut::gain_bin(double gain_pct) const {
  require(!std::isnan(gain_pct), "reward lookup: NaN gain");
  gain_pct = std::clamp(gain_pct, 0.0, gain_max);
  const int b = static_cast<int>(std::floor(gain_pct / (gain_max / gain_bins)));
  return std::min(b, gain_bins - 1);
}

double RewardLut::lookup(double loss_pct, double gain_pct) const {
  return cells[static_cast<size_t>(loss_bin(loss_pct)) * gain_bins + gain_bin(gain_pct)];
}

double RewardLut::max_cell() const { return *std::max_element(cells.begin(), cells.end()); }
double RewardLut::min_cell() const { return *std::min_element(cells.begin(), cells.end()); }

void RewardLut::save_csv(const std::string& path) const {
  std::ostringstream out;
  out.precision(12);
  for (int li = 0; li < loss_bins; ++li) {
    for (int gi = 0; gi < gain_bins; ++gi) {
      if (gi) out << ',';
      out << cells[static_cast<size_t>(li) * gain_bins + gi];
    }
    out << '\n';
  }
  const std::string text = out.str();
  write_file(path, text.data(), text.size());
}

RewardLut RewardLut::load_csv(const std::string& path) {
  auto raw = read_file(path);
  std::istringstream in(std::string(raw.begin(), raw.end()));
  RewardLut lut;
  lut.cells.clear();
  std::string line;
  int rows = 0, cols = -1;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string cell;
    int c = 0;
    while (std::getline(ls, cell, ',')) {
      lut.cells.push_back(std::stod(cell));
      ++c;
    }
    if (cols < 0) cols = c;
    require(c == cols, "reward lut csv: ragged rows");
    ++rows;
  }
  require(rows > 0 && cols > 0, "reward lut csv: empty file");
  lut.loss_bins = rows;
  lut.gain_bins = cols;
  return lut;
}

}  // namespace cforge
