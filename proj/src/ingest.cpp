#include "rankspec/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

#include "rankspec/error.hpp"
#include "rankspec/resample.hpp"
#include "rankspec/rng.hpp"

namespace rankspec {

namespace detail {
extern const char* const kPinyinInventoryText;
}

namespace {

constexpr std::size_t kMaxBaseLetters = 7;

std::vector<std::string> load_inventory() {
  std::vector<std::string> out;
  std::istringstream in(detail::kPinyinInventoryText);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) out.push_back(line);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t");
  return s.substr(first, last - first + 1);
}

// Splits on '\n', stripping a trailing '\r'. Line numbers are 1-based.
template <typename F>
void for_each_line(std::string_view content, F&& f) {
  std::size_t line_no = 0;
  while (!content.empty()) {
    ++line_no;
    const auto nl = content.find('\n');
    std::string_view line = content.substr(0, nl);
    content = nl == std::string_view::npos ? std::string_view{} : content.substr(nl + 1);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    f(line_no, line);
  }
}

std::string label_for(int index, int width) {
  std::string digits = std::to_string(index);
  if (digits.size() < static_cast<std::size_t>(width)) digits.insert(0, width - digits.size(), '0');
  return digits;
}

}  // namespace

std::span<const std::string> pinyin_inventory() {
  static const std::vector<std::string> inventory = load_inventory();
  return inventory;
}

bool is_known_base(std::string_view base) {
  const auto inv = pinyin_inventory();
  return std::binary_search(inv.begin(), inv.end(), base, std::less<>{});
}

PinyinSyllable validate_pinyin(std::string_view token, bool strict) {
  const std::string shown(token);
  if (token.empty()) throw InputError("empty pinyin token");
  const char last = token.back();
  if (last < '0' || last > '9') throw InputError("missing tone digit in '" + shown + "'");
  const int tone = last - '0';
  token.remove_suffix(1);

  std::string base;
  for (std::size_t i = 0; i < token.size(); ++i) {
    const char ch = token[i];
    if (ch >= 'a' && ch <= 'z') {
      if (ch == 'u' && i + 1 < token.size() && token[i + 1] == ':') {
        base += 'v';
        ++i;
      } else {
        base += ch;
      }
    } else if (token.substr(i, 2) == "\xC3\xBC") {  // UTF-8 u-umlaut
      base += 'v';
      ++i;
    } else if (ch >= '0' && ch <= '9') {
      throw InputError("extra tone digit in '" + shown + "'");
    } else {
      throw InputError("invalid character in pinyin '" + shown + "'");
    }
  }
  if (base.empty()) throw InputError("missing base syllable in '" + shown + "'");
  if (base.size() > kMaxBaseLetters) throw InputError("base syllable too long in '" + shown + "'");

  const bool in_range = strict ? (tone >= 1 && tone <= 4) : (tone <= 5);
  if (!in_range) throw InputError("tone digit out of range in '" + shown + "'");
  if (strict && !is_known_base(base)) throw InputError("unknown base syllable '" + base + "'");
  return {std::move(base), tone == 0 ? 5 : tone};
}

std::vector<SpectrumEntry> parse_counts_file(std::string_view content) {
  std::vector<SpectrumEntry> out;
  std::unordered_map<std::string, std::size_t> seen;
  bool any_data_line = false;
  for_each_line(content, [&](std::size_t line_no, std::string_view line) {
    const auto body = trim(line);
    if (body.empty() || body.front() == '#') return;
    const auto comma = body.find(',');
    if (comma == std::string_view::npos || body.find(',', comma + 1) != std::string_view::npos)
      throw ParseError(line_no, "expected 'label,count'");
    const auto label = trim(body.substr(0, comma));
    const auto count_text = trim(body.substr(comma + 1));
    if (!any_data_line && label == "syllable" && count_text == "count") {
      any_data_line = true;
      return;
    }
    any_data_line = true;
    if (label.empty()) throw ParseError(line_no, "empty label");
    std::int64_t count = 0;
    const auto [end, ec] = std::from_chars(count_text.data(), count_text.data() + count_text.size(), count);
    if (count_text.empty() || ec != std::errc{} || end != count_text.data() + count_text.size())
      throw ParseError(line_no, "count is not an integer: '" + std::string(count_text) + "'");
    if (count < 1) throw ParseError(line_no, "count must be positive");
    if (!seen.emplace(std::string(label), line_no).second)
      throw ParseError(line_no, "duplicate label '" + std::string(label) + "'");
    out.push_back({std::string(label), count});
  });
  return out;
}

std::string write_counts_file(std::span<const SpectrumEntry> entries) {
  std::string out = "syllable,count\n";
  for (const auto& e : entries) {
    out += e.label;
    out += ',';
    out += std::to_string(e.count);
    out += '\n';
  }
  return out;
}

std::vector<SpectrumEntry> parse_pairs_file(std::string_view content, bool strict) {
  std::vector<SpectrumEntry> out;
  std::unordered_map<std::string, std::size_t> index;
  std::set<std::pair<std::string, std::string>> pairs;
  for_each_line(content, [&](std::size_t line_no, std::string_view line) {
    if (trim(line).empty() || trim(line).front() == '#') return;
    const auto tab = line.find('\t');
    if (tab == std::string_view::npos || line.find('\t', tab + 1) != std::string_view::npos)
      throw ParseError(line_no, "expected 'character<TAB>pinyin'");
    const auto character = trim(line.substr(0, tab));
    if (character.empty()) throw ParseError(line_no, "empty character field");
    std::string label;
    try {
      label = validate_pinyin(trim(line.substr(tab + 1)), strict).canonical();
    } catch (const InputError& e) {
      throw ParseError(line_no, e.what());
    }
    if (!pairs.emplace(std::string(character), label).second) return;
    const auto [it, inserted] = index.emplace(label, out.size());
    if (inserted) out.push_back({label, 0});
    ++out[it->second].count;
  });
  return out;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot read '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw InputError("error reading '" + path.string() + "'");
  return buf.str();
}

namespace {

// Middle-count construction for the fixture. `c` holds counts for ranks
// first_rank.., `v` the real-valued targets they were rounded from.
class MiddleCounts {
 public:
  MiddleCounts(std::vector<std::int64_t> c, std::vector<double> v, std::int64_t lo, std::int64_t hi)
      : c_(std::move(c)), v_(std::move(v)), lo_(lo), hi_(hi) {}

  std::int64_t sum() const { return std::accumulate(c_.begin(), c_.end(), std::int64_t{0}); }
  const std::vector<std::int64_t>& counts() const { return c_; }

  // Moves one unit on the entry whose rounding most favours the move, among
  // entries whose count satisfies `eligible`. Returns false if none qualifies.
  template <typename Pred>
  bool step(int direction, Pred eligible) {
    std::size_t best = c_.size();
    double best_gap = 0.0;
    for (std::size_t i = 0; i < c_.size(); ++i) {
      if (!eligible(c_[i])) continue;
      const double gap = direction < 0 ? static_cast<double>(c_[i]) - v_[i] : v_[i] - static_cast<double>(c_[i]);
      if (best == c_.size() || gap > best_gap) {
        best = i;
        best_gap = gap;
      }
    }
    if (best == c_.size()) return false;
    c_[best] += direction;
    return true;
  }

  std::int64_t count_if(std::int64_t from, std::int64_t to) const {
    return std::count_if(c_.begin(), c_.end(), [&](std::int64_t x) { return x >= from && x <= to; });
  }

  std::int64_t lo() const { return lo_; }
  std::int64_t hi() const { return hi_; }

 private:
  std::vector<std::int64_t> c_;
  std::vector<double> v_;
  std::int64_t lo_, hi_;
};

[[noreturn]] void infeasible(const std::string& why) { throw InputError("infeasible fixture spec: " + why); }

}  // namespace

std::vector<SpectrumEntry> generate_fixture(const FixtureSpec& spec) {
  const int n = spec.n_syllables;
  const int n_top = static_cast<int>(spec.top15.size());
  const int n_mid = n - n_top - spec.singleton_count;
  if (n_mid < 1) infeasible("no room for middle entries");
  if (spec.middle_min < 2 || spec.middle_max < spec.middle_min) infeasible("bad middle count range");
  if (!(spec.beta_weight >= 0.0 && spec.beta_weight <= 1.0)) infeasible("beta_weight outside [0, 1]");

  std::int64_t top_sum = 0;
  for (int i = 0; i < n_top; ++i) {
    const auto& e = spec.top15[static_cast<std::size_t>(i)];
    if (i > 0 && e.count > spec.top15[static_cast<std::size_t>(i - 1)].count) infeasible("top entries not descending");
    if (e.count < spec.middle_max) infeasible("top entry below the middle range");
    top_sum += e.count;
  }
  const std::int64_t mass = spec.total_characters - top_sum - spec.singleton_count;
  if (mass < n_mid * spec.middle_min || mass > n_mid * spec.middle_max) infeasible("middle total out of reach");

  // Mean curve over ranks n_top+1 .. n_top+n_mid.
  std::vector<double> beta_part(static_cast<std::size_t>(n_mid)), log_part(static_cast<std::size_t>(n_mid));
  for (int i = 0; i < n_mid; ++i) {
    const double r = n_top + 1 + i;
    beta_part[static_cast<std::size_t>(i)] =
        spec.beta.c * std::pow(n + 1.0 - r, spec.beta.b) / std::pow(r, spec.beta.a);
    log_part[static_cast<std::size_t>(i)] = spec.log_intercept + spec.log_slope * std::log(r);
  }
  const double beta_sum = std::accumulate(beta_part.begin(), beta_part.end(), 0.0);
  const double log_sum = std::accumulate(log_part.begin(), log_part.end(), 0.0);
  if (!(beta_sum > 0.0) || !(log_sum > 0.0)) infeasible("mean curve is not positive");

  Rng rng(spec.seed);
  std::vector<double> target(static_cast<std::size_t>(n_mid));
  std::vector<std::int64_t> rounded(static_cast<std::size_t>(n_mid));
  const auto m = static_cast<double>(mass);
  for (std::size_t i = 0; i < target.size(); ++i) {
    target[i] = spec.beta_weight * beta_part[i] * m / beta_sum + (1.0 - spec.beta_weight) * log_part[i] * m / log_sum;
    const auto c = static_cast<std::int64_t>(std::floor(target[i] + rng.uniform()));
    rounded[i] = std::clamp(c, spec.middle_min, spec.middle_max);
  }
  MiddleCounts mid(std::move(rounded), std::move(target), spec.middle_min, spec.middle_max);
  const std::int64_t lo = mid.lo(), hi = mid.hi();

  // Hit the middle total.
  while (mid.sum() > mass) mid.step(-1, [&](std::int64_t c) { return c > lo; });
  while (mid.sum() < mass) mid.step(+1, [&](std::int64_t c) { return c < hi; });

  // Median and MAD, in terms of the whole data set. Ascending: singletons,
  // middle, top entries; the median is the mean of order statistics lower
  // and lower + 1 (1-based) when n is even.
  const std::int64_t med = spec.median_target, mad = spec.mad_target;
  if (med - mad < lo || med + mad + 2 > hi) infeasible("median/MAD targets too close to the middle bounds");
  const std::int64_t lower = (n + 1) / 2;
  const std::int64_t upper = n / 2 + 1;
  const std::int64_t mid_lower = lower - spec.singleton_count;
  const std::int64_t mid_upper = upper - spec.singleton_count;
  if (mid_lower < 1 || mid_upper > n_mid) infeasible("median falls outside the middle entries");

  // Compensating moves stay clear of [med - mad - 1, med + mad + 1] so they
  // never touch the counts the median and MAD depend on.
  const auto far_down = [&] {
    if (!mid.step(-1, [&](std::int64_t c) { return c >= med + mad + 2; })) infeasible("no room to rebalance");
  };
  const auto far_up = [&] {
    if (!mid.step(+1, [&](std::int64_t c) { return c >= med + mad + 1 && c < hi; })) infeasible("no room to rebalance");
  };

  // Order statistic k of the middle is `med` for both k iff
  // #(c < med) < mid_lower and #(c <= med) >= mid_upper.
  while (mid.count_if(lo, med - 1) >= mid_lower) {
    if (!mid.step(+1, [&](std::int64_t c) { return c == med - 1; })) infeasible("median unreachable");
    far_down();
  }
  while (mid.count_if(lo, med) < mid_upper) {
    if (!mid.step(-1, [&](std::int64_t c) { return c == med + 1; })) infeasible("median unreachable");
    far_up();
  }

  // Deviations from the median over the whole set: singletons sit at
  // med - 1 and the top entries far above, so only middle counts matter.
  const std::int64_t single_dev = med - 1;
  if (single_dev <= mad) infeasible("singletons inside the MAD band");
  while (mid.count_if(med - mad + 1, med + mad - 1) >= lower) {
    if (mid.step(-1, [&](std::int64_t c) { return c == med - mad + 1; })) {
      far_up();
    } else if (mid.step(+1, [&](std::int64_t c) { return c == med + mad - 1; })) {
      far_down();
    } else {
      infeasible("MAD unreachable");
    }
  }
  while (mid.count_if(med - mad, med + mad) < upper) {
    if (!mid.step(-1, [&](std::int64_t c) { return c == med + mad + 1; })) infeasible("MAD unreachable");
    far_up();
  }

  std::vector<std::int64_t> middle = mid.counts();
  std::sort(middle.begin(), middle.end(), std::greater<>{});

  std::vector<SpectrumEntry> all(spec.top15.begin(), spec.top15.end());
  const int width = std::max<int>(4, static_cast<int>(std::to_string(n).size()));
  int rank = n_top;
  for (auto c : middle) all.push_back({"s" + label_for(++rank, width), c});
  for (int i = 0; i < spec.singleton_count; ++i) all.push_back({"s" + label_for(++rank, width), 1});

  const auto built = RankSpectrum::build(all);
  const auto stats = descriptive_stats(built);
  if (built.total() != spec.total_characters) infeasible("total not reached");
  if (stats.median != static_cast<double>(med) || stats.mad != static_cast<double>(mad))
    infeasible("median/MAD not reached");
  return {built.entries().begin(), built.entries().end()};
}

std::vector<SpectrumEntry> generate_from_model(const ModelParams& params, int n, std::int64_t total, Noise noise,
                                               std::uint64_t seed) {
  if (n < 4) throw std::invalid_argument("generate_from_model needs n >= 4");
  if (total < 1) throw std::invalid_argument("total must be positive");
  const auto model = make_model(params, n);
  std::vector<double> values(static_cast<std::size_t>(n));
  for (int r = 1; r <= n; ++r) {
    const double v = eval_model(model, r);
    if (!(v > 0.0) || !std::isfinite(v))
      throw std::invalid_argument("model is not positive at rank " + std::to_string(r));
    values[static_cast<std::size_t>(r - 1)] = v;
  }
  const double scale = static_cast<double>(total) / std::accumulate(values.begin(), values.end(), 0.0);

  const int width = std::max<int>(4, static_cast<int>(std::to_string(n).size()));
  std::vector<SpectrumEntry> out;
  Rng rng(seed);
  for (int r = 1; r <= n; ++r) {
    const double v = values[static_cast<std::size_t>(r - 1)] * scale;
    const std::int64_t c = noise == Noise::None ? std::max<std::int64_t>(1, std::llround(v)) : poisson_sample(v, rng);
    if (c > 0) out.push_back({"r" + label_for(r, width), c});
  }
  if (out.empty()) throw NumericalError("every Poisson draw was zero");
  return out;
}

}  // namespace rankspec
