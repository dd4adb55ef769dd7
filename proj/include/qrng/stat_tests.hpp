#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace qrng {

/// Read-only view of a packed MSB-first bit string.
struct BitView {
    std::span<const std::uint8_t> bytes;
    std::size_t size = 0;

    BitView() = default;
    BitView(std::span<const std::uint8_t> b, std::size_t bits);
    explicit BitView(std::span<const std::uint8_t> b) : BitView(b, b.size() * 8) {}
    bool get(std::size_t i) const { return (bytes[i >> 3] >> (7 - (i & 7))) & 1; }
};

struct AutocorrResult {
    std::vector<int> lags;  // 0..max_lag
    std::vector<double> coefficients;
    std::vector<double> p_values;
    std::size_t n_used = 0;
    double alpha = 0.01;
    bool small_sample = false;  // N < 1e4: the normal approximation is unreliable
};

inline constexpr std::size_t kAutocorrMinReliable = 10'000;

/// Biased sample autocorrelation with global mean and variance (divide by N), lags
/// 0..max_lag, two-sided p-values from R(k) sqrt(N) ~ N(0, 1): p = erfc(|R| sqrt(N / 2)).
AutocorrResult autocorrelation(std::span<const double> x, int max_lag, double alpha = 0.01);

/// Same estimator for a 0/1 sequence, computed with word popcounts.
AutocorrResult autocorrelation(BitView bits, int max_lag, double alpha = 0.01);

struct TestStatistic {
    double statistic = 0.0;
    double p_value = 0.0;
    bool applicable = true;
    bool underflow = false;  // p below the smallest normal double, reported as 0
};

/// Frequency (monobit): s = |sum(2b - 1)| / sqrt(N), p = erfc(s / sqrt 2). Needs N >= 100.
TestStatistic monobit_frequency(BitView bits);

/// Frequency within blocks: chi^2 = 4M sum (pi_i - 1/2)^2, p = Q(N_blocks / 2, chi^2 / 2).
/// Needs N >= 100 M.
TestStatistic block_frequency(BitView bits, std::size_t block_len);

/// Runs test. Not applicable when the monobit prerequisite |pi - 1/2| < 2 / sqrt(N) fails.
TestStatistic runs_test(BitView bits);

struct TestEntry {
    std::string name;
    double statistic = 0.0;
    double p_value = 0.0;
    bool applicable = true;
    bool pass = false;
    std::string note;
};

struct TestSuiteResult {
    std::vector<TestEntry> tests;
    AutocorrResult autocorr;
    std::size_t stream_length = 0;
    double alpha = 0.01;

    /// True when every applicable test passes.
    bool all_pass() const;
    std::size_t failures() const;
};

struct SuiteOptions {
    double alpha = 0.01;
    int max_lag = 100;
    std::size_t block_len = 128;
};

/// Monobit, block frequency, runs and per-lag autocorrelation (lags 1..max_lag).
TestSuiteResult suite(BitView bits, const SuiteOptions& options = {});

/// "test,p" rows for every entry.
std::string suite_pvalue_csv(const TestSuiteResult& result);
/// "lag,R,p" rows for lags 1..max_lag.
std::string autocorr_csv(const AutocorrResult& result);

}  // namespace qrng
