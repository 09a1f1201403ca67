// include/avsr/schedule.hpp

// Copyright 2026  AVSR Toolkit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#ifndef AVSR_SCHEDULE_HPP
#define AVSR_SCHEDULE_HPP

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "avsr/errors.hpp"

namespace avsr {

struct TrainConfig {
  double learning_rate = 0.00004;
  double halving_threshold = 0.5;  // percentage points of cv accuracy
  double stop_threshold = 0.1;
  int min_epochs = 0;   // epochs before the schedule may halve or stop
  int max_epochs = 50;  // safety cap on top of the stopping rule
  int batch_size = 256;
  uint64_t seed = 0;
  double clip_norm = 5.0;
  double fill_value = 0.0;  // written over a masked modality block
  std::string stage;

  void validate() const {
    if (halving_threshold <= 0.0 || stop_threshold <= 0.0)
      throw DataError("TrainConfig: thresholds must be positive");
    if (stop_threshold > halving_threshold)
      throw DataError("TrainConfig: stop threshold above halving threshold");
    if (learning_rate <= 0.0)
      throw DataError("TrainConfig: learning rate must be positive");
  }
};

struct EpochReport {
  int epoch = 0;           // 1-based
  double train_loss = 0.0; // mean -log P per frame
  double cv_accuracy = 0.0;  // percent
  double learning_rate = 0.0;  // rate in effect during the epoch
  double seconds = 0.0;
};

// Newbob rate control: halve when cross-validation improvement falls below
// the halving threshold, keep halving every epoch after that, stop when
// the improvement falls below the stop threshold.
class NewbobSchedule {
 public:
  NewbobSchedule(double initial_rate, double halving_threshold,
                 double stop_threshold, int min_epochs)
      : rate_(initial_rate),
        halving_threshold_(halving_threshold),
        stop_threshold_(stop_threshold),
        min_epochs_(min_epochs) {}

  double rate() const { return rate_; }
  bool halving() const { return halving_; }

  // Feed the cv metric measured after an epoch; returns false when
  // training should stop.  The adjusted rate applies to the next epoch.
  bool advance(double cv_metric) {
    ++epoch_;
    const double improvement = cv_metric - prev_metric_;
    prev_metric_ = cv_metric;
    if (epoch_ <= min_epochs_) return true;
    if (improvement < stop_threshold_) return false;
    if (halving_ || improvement < halving_threshold_) {
      halving_ = true;
      rate_ *= 0.5;
    }
    return true;
  }

 private:
  double rate_;
  double halving_threshold_;
  double stop_threshold_;
  int min_epochs_;
  int epoch_ = 0;
  bool halving_ = false;
  double prev_metric_ = -std::numeric_limits<double>::infinity();
};

}  // namespace avsr

#endif  // AVSR_SCHEDULE_HPP
