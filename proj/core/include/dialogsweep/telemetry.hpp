#pragma once

#include <atomic>
#include <filesystem>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <type_traits>
#include <utility>
#include <variant>
#include <vector>

#include "dialogsweep/clock.hpp"
#include "dialogsweep/metrics.hpp"
#include "dialogsweep/promptkit.hpp"

namespace dialogsweep {

struct EnergySample {
  double cpu_j = 0.0;
  double gpu_j = 0.0;
  double dram_j = 0.0;
  double total_j = 0.0;

  static EnergySample of(double cpu, double gpu, double dram) {
    return {cpu, gpu, dram, cpu + gpu + dram};
  }
  EnergySample operator-(const EnergySample& o) const {
    return of(cpu_j - o.cpu_j, gpu_j - o.gpu_j, dram_j - o.dram_j);
  }
  EnergySample operator+(const EnergySample& o) const {
    return of(cpu_j + o.cpu_j, gpu_j + o.gpu_j, dram_j + o.dram_j);
  }
};

/// Cumulative energy counters. A span's energy is the difference of two reads.
class EnergyMeter {
 public:
  virtual ~EnergyMeter() = default;
  virtual EnergySample read() = 0;
  /// Recorded in every run record, e.g. "simulated(cpu=60W,gpu=30W,dram=10W)".
  virtual std::string mode() const = 0;
};

/// Constant power per component; energy = watts x clock seconds.
class SimulatedEnergyMeter final : public EnergyMeter {
 public:
  SimulatedEnergyMeter(const Clock& clock, double cpu_w, double gpu_w, double dram_w);

  EnergySample read() override;
  std::string mode() const override;

 private:
  const Clock& clock_;
  double cpu_w_, gpu_w_, dram_w_;
};

/// Reads CPU package and DRAM energy from the powercap (RAPL) sysfs tree and
/// GPU energy from the NVIDIA management library when it can be loaded. A
/// background thread samples at `sample_hz` so counter wrap-around between
/// reads is accounted for. Only one instance may exist per process; a second
/// construction throws MeterBusy. Throws MeterUnavailable when no counter
/// source is readable.
class HardwareEnergyMeter final : public EnergyMeter {
 public:
  struct Options {
    std::filesystem::path powercap_root = "/sys/class/powercap";
    bool use_nvml = true;
    double sample_hz = 10.0;
  };

  HardwareEnergyMeter();
  explicit HardwareEnergyMeter(Options options);
  ~HardwareEnergyMeter() override;

  HardwareEnergyMeter(const HardwareEnergyMeter&) = delete;
  HardwareEnergyMeter& operator=(const HardwareEnergyMeter&) = delete;

  EnergySample read() override;
  std::string mode() const override;

 private:
  struct RaplDomain {
    std::filesystem::path energy_file;
    double max_range_uj = 0.0;
    double last_uj = 0.0;
    bool dram = false;
  };
  struct Nvml;

  void sample_locked();

  Options options_;
  std::vector<RaplDomain> rapl_;
  std::unique_ptr<Nvml> nvml_;
  std::mutex mu_;
  EnergySample accumulated_;
  std::atomic<bool> stop_{false};
  std::thread sampler_;
};

template <class T>
struct Measured {
  T result;
  double seconds = 0.0;
  EnergySample energy;
};

/// Runs `fn` once and reports the elapsed monotonic time and energy of exactly
/// that call. Spans may nest.
template <class F>
auto measure(const Clock& clock, EnergyMeter& meter, F&& fn) {
  using R = std::invoke_result_t<F>;
  using Stored = std::conditional_t<std::is_void_v<R>, std::monostate, R>;
  const EnergySample e0 = meter.read();
  const double t0 = clock.now_s();
  Measured<Stored> out;
  if constexpr (std::is_void_v<R>) {
    std::forward<F>(fn)();
  } else {
    out.result = std::forward<F>(fn)();
  }
  out.seconds = clock.now_s() - t0;
  out.energy = meter.read() - e0;
  return out;
}

inline constexpr int kDefaultSessionCount = 35;

/// total / session_count; throws ZeroSessions when session_count < 1.
double per_session(double total, int session_count);

struct RunRecord {
  PromptDesign design;
  int batch_size = 1;
  double total_time_s = 0.0;
  double per_session_time_s = 0.0;
  EnergySample energy;  // whole run
  double per_session_energy_j = 0.0;
  MetricsReport metrics;
  std::size_t fallback_count = 0;
  std::size_t request_count = 0;
  std::size_t retry_count = 0;
  std::size_t utterance_count = 0;
  int session_count = kDefaultSessionCount;
  std::string meter_mode;
  bool standard_batch_size = true;
};

RunRecord make_run_record(const PromptDesign& design, int batch_size, double total_time_s,
                          const EnergySample& energy, const MetricsReport& metrics,
                          int session_count);

}  // namespace dialogsweep
