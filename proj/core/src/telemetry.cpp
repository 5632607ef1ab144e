#include "dialogsweep/telemetry.hpp"

#include <dlfcn.h>

#include <chrono>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "dialogsweep/batchrunner.hpp"
#include "dialogsweep/errors.hpp"

namespace dialogsweep {
namespace {

std::atomic<bool> g_hardware_meter_held{false};

std::optional<double> read_number(const std::filesystem::path& file) {
  std::ifstream in(file);
  double v = 0;
  if (in >> v) return v;
  return std::nullopt;
}

std::string read_line(const std::filesystem::path& file) {
  std::ifstream in(file);
  std::string s;
  std::getline(in, s);
  return s;
}

}  // namespace

SimulatedEnergyMeter::SimulatedEnergyMeter(const Clock& clock, double cpu_w, double gpu_w,
                                           double dram_w)
    : clock_(clock), cpu_w_(cpu_w), gpu_w_(gpu_w), dram_w_(dram_w) {
  if (cpu_w < 0 || gpu_w < 0 || dram_w < 0) {
    throw Error(ErrorKind::Config, "simulated component power must be >= 0");
  }
}

EnergySample SimulatedEnergyMeter::read() {
  const double t = clock_.now_s();
  return EnergySample::of(cpu_w_ * t, gpu_w_ * t, dram_w_ * t);
}

std::string SimulatedEnergyMeter::mode() const {
  return fmt::format("simulated(cpu={}W,gpu={}W,dram={}W)", cpu_w_, gpu_w_, dram_w_);
}

// Minimal runtime binding to libnvidia-ml; no headers needed at build time.
struct HardwareEnergyMeter::Nvml {
  using Init = int (*)();
  using Shutdown = int (*)();
  using Count = int (*)(unsigned int*);
  using Handle = int (*)(unsigned int, void**);
  using Energy = int (*)(void*, unsigned long long*);

  void* lib = nullptr;
  Shutdown shutdown = nullptr;
  Energy energy = nullptr;
  std::vector<void*> devices;
  std::vector<unsigned long long> last_mj;

  static std::unique_ptr<Nvml> open() {
    void* lib = dlopen("libnvidia-ml.so.1", RTLD_NOW | RTLD_LOCAL);
    if (!lib) return nullptr;
    auto n = std::make_unique<Nvml>();
    n->lib = lib;
    auto init = reinterpret_cast<Init>(dlsym(lib, "nvmlInit_v2"));
    n->shutdown = reinterpret_cast<Shutdown>(dlsym(lib, "nvmlShutdown"));
    auto count = reinterpret_cast<Count>(dlsym(lib, "nvmlDeviceGetCount_v2"));
    auto handle = reinterpret_cast<Handle>(dlsym(lib, "nvmlDeviceGetHandleByIndex_v2"));
    n->energy = reinterpret_cast<Energy>(dlsym(lib, "nvmlDeviceGetTotalEnergyConsumption"));
    if (!init || !n->shutdown || !count || !handle || !n->energy || init() != 0) {
      n->shutdown = nullptr;
      return nullptr;
    }
    unsigned int devices = 0;
    if (count(&devices) != 0) return nullptr;
    for (unsigned int i = 0; i < devices; ++i) {
      void* dev = nullptr;
      unsigned long long mj = 0;
      if (handle(i, &dev) == 0 && n->energy(dev, &mj) == 0) {
        n->devices.push_back(dev);
        n->last_mj.push_back(mj);
      }
    }
    if (n->devices.empty()) return nullptr;
    return n;
  }

  // Joules since the previous poll.
  double poll() {
    double joules = 0.0;
    for (std::size_t i = 0; i < devices.size(); ++i) {
      unsigned long long mj = 0;
      if (energy(devices[i], &mj) != 0) continue;
      if (mj >= last_mj[i]) joules += static_cast<double>(mj - last_mj[i]) / 1000.0;
      last_mj[i] = mj;
    }
    return joules;
  }

  ~Nvml() {
    if (shutdown) shutdown();
    if (lib) dlclose(lib);
  }
};

HardwareEnergyMeter::HardwareEnergyMeter() : HardwareEnergyMeter(Options{}) {}

HardwareEnergyMeter::HardwareEnergyMeter(Options options) : options_(std::move(options)) {
  if (!(options_.sample_hz >= 10.0)) {
    throw Error(ErrorKind::Config, "hardware meter sampling must be >= 10 Hz");
  }
  if (g_hardware_meter_held.exchange(true)) {
    throw Error(ErrorKind::MeterBusy, "a hardware energy meter is already active in this process");
  }
  try {
    std::error_code ec;
    for (std::filesystem::directory_iterator it(options_.powercap_root, ec), end; !ec && it != end;
         it.increment(ec)) {
      const auto name = it->path().filename().string();
      if (name.rfind("intel-rapl:", 0) != 0) continue;
      const auto domain = read_line(it->path() / "name");
      // Top-level "package-N" domains count as CPU; "dram" subdomains as DRAM.
      const bool package = domain.rfind("package", 0) == 0;
      const bool dram = domain == "dram";
      if (!package && !dram) continue;
      auto uj = read_number(it->path() / "energy_uj");
      auto range = read_number(it->path() / "max_energy_range_uj");
      if (!uj) continue;
      rapl_.push_back({it->path() / "energy_uj", range.value_or(0.0), *uj, dram});
    }
    if (options_.use_nvml) nvml_ = Nvml::open();
    if (rapl_.empty() && !nvml_) {
      throw Error(ErrorKind::MeterUnavailable,
                  "no readable RAPL counters under " + options_.powercap_root.string() +
                      " and no NVML; select the simulated meter explicitly");
    }
  } catch (...) {
    g_hardware_meter_held = false;
    throw;
  }

  const auto period = std::chrono::duration<double>(1.0 / options_.sample_hz);
  sampler_ = std::thread([this, period] {
    while (!stop_.load()) {
      std::this_thread::sleep_for(period);
      std::lock_guard lock(mu_);
      sample_locked();
    }
  });
}

HardwareEnergyMeter::~HardwareEnergyMeter() {
  stop_ = true;
  if (sampler_.joinable()) sampler_.join();
  g_hardware_meter_held = false;
}

void HardwareEnergyMeter::sample_locked() {
  double cpu = 0.0, dram = 0.0;
  for (auto& d : rapl_) {
    auto uj = read_number(d.energy_file);
    if (!uj) continue;
    double delta = *uj - d.last_uj;
    if (delta < 0) delta += d.max_range_uj;  // counter wrapped
    d.last_uj = *uj;
    (d.dram ? dram : cpu) += delta / 1e6;
  }
  const double gpu = nvml_ ? nvml_->poll() : 0.0;
  accumulated_ = accumulated_ + EnergySample::of(cpu, gpu, dram);
}

EnergySample HardwareEnergyMeter::read() {
  std::lock_guard lock(mu_);
  sample_locked();
  return accumulated_;
}

std::string HardwareEnergyMeter::mode() const {
  std::size_t pkg = 0, dram = 0;
  for (const auto& d : rapl_) (d.dram ? dram : pkg) += 1;
  return fmt::format("hardware(rapl_packages={},rapl_dram={},nvml_gpus={},hz={})", pkg, dram,
                     nvml_ ? nvml_->devices.size() : 0, options_.sample_hz);
}

double per_session(double total, int session_count) {
  if (session_count < 1) throw Error(ErrorKind::ZeroSessions, "session count must be >= 1");
  return total / static_cast<double>(session_count);
}

RunRecord make_run_record(const PromptDesign& design, int batch_size, double total_time_s,
                          const EnergySample& energy, const MetricsReport& metrics,
                          int session_count) {
  RunRecord r;
  r.design = design;
  r.batch_size = batch_size;
  r.total_time_s = total_time_s;
  r.per_session_time_s = per_session(total_time_s, session_count);
  r.energy = energy;
  r.per_session_energy_j = per_session(energy.total_j, session_count);
  r.metrics = metrics;
  r.session_count = session_count;
  r.standard_batch_size = is_standard_batch_size(batch_size);
  return r;
}

}  // namespace dialogsweep
