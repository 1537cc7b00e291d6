// Copyright 2026 The bitext-align Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <chrono>
#include <thread>
#include <vector>

namespace bitext {

/// Injectable time source. Times are seconds since an arbitrary epoch.
class Clock {
 public:
  virtual ~Clock() = default;
  virtual double now() = 0;
  virtual void sleep_for(double seconds) = 0;
};

class SystemClock final : public Clock {
 public:
  double now() override {
    using namespace std::chrono;
    return duration<double>(steady_clock::now().time_since_epoch()).count();
  }
  void sleep_for(double seconds) override {
    if (seconds > 0) {
      std::this_thread::sleep_for(std::chrono::duration<double>(seconds));
    }
  }
};

/// Simulated clock for tests: sleeping advances time instantly and is
/// recorded.
class SimulatedClock final : public Clock {
 public:
  double now() override { return now_; }
  void sleep_for(double seconds) override {
    if (seconds <= 0) return;
    sleeps_.push_back(seconds);
    now_ += seconds;
  }
  const std::vector<double>& sleeps() const noexcept { return sleeps_; }

 private:
  double now_ = 0.0;
  std::vector<double> sleeps_;
};

}  // namespace bitext
