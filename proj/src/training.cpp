#include "tweetgauge/neural/training.hpp"

#include <algorithm>
#include <map>
#include <numeric>

#include "tweetgauge/text_io.hpp"

namespace tweetgauge {

void TrainConfig::validate() const {
  if (max_epochs == 0) throw ConfigError("max_epochs must be positive");
  if (batch_size == 0) throw ConfigError("batch_size must be positive");
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) throw ConfigError("learning_rate must be positive");
  if (patience == 0) throw ConfigError("patience must be positive");
  if (!(validation_fraction > 0.0 && validation_fraction < 1.0)) {
    throw ConfigError("validation_fraction must lie in (0, 1)");
  }
}

void TrainReport::write_csv(std::ostream& out) const {
  out << "epoch,train_loss,val_loss\n";
  for (std::size_t e = 0; e < train_loss.size(); ++e) {
    out << e << ',' << format_double(train_loss[e]) << ',' << format_double(validation_loss[e]) << '\n';
  }
}

std::vector<std::vector<std::size_t>> shuffled_batches(std::size_t count, std::size_t batch_size, Rng& rng) {
  std::vector<std::size_t> order(count);
  std::iota(order.begin(), order.end(), std::size_t{0});
  rng.shuffle(order.begin(), order.end());
  std::vector<std::vector<std::size_t>> batches;
  for (std::size_t start = 0; start < count; start += batch_size) {
    const std::size_t end = std::min(count, start + batch_size);
    batches.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(start),
                         order.begin() + static_cast<std::ptrdiff_t>(end));
  }
  return batches;
}

std::vector<std::vector<std::size_t>> length_bucketed_batches(std::span<const std::size_t> lengths,
                                                              std::size_t batch_size, Rng& rng) {
  std::vector<std::size_t> order(lengths.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  rng.shuffle(order.begin(), order.end());
  std::map<std::size_t, std::vector<std::size_t>> buckets;
  for (auto i : order) buckets[lengths[i]].push_back(i);

  std::vector<std::vector<std::size_t>> batches;
  for (auto& [length, members] : buckets) {
    for (std::size_t start = 0; start < members.size(); start += batch_size) {
      const std::size_t end = std::min(members.size(), start + batch_size);
      batches.emplace_back(members.begin() + static_cast<std::ptrdiff_t>(start),
                           members.begin() + static_cast<std::ptrdiff_t>(end));
    }
  }
  rng.shuffle(batches.begin(), batches.end());
  return batches;
}

}  // namespace tweetgauge
