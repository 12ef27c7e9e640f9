#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "lendsim/events.hpp"
#include "lendsim/multi_asset.hpp"
#include "lendsim/numeric.hpp"
#include "lendsim/pricing.hpp"

namespace lendsim {

// columns: t, size, duration
template <typename R>
void write_stream_csv(const std::filesystem::path& path, const EventStream<R>& stream) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string());
  out << "t,size,duration\n";
  for (const auto& e : stream)
    out << e.t << ',' << format_double(scalar_ops<R>::to_double(e.size)) << ',' << e.duration
        << '\n';
}

inline EventStream<double> read_stream_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open " + path.string());
  EventStream<double> stream;
  std::string line;
  if (!std::getline(in, line)) throw std::invalid_argument("empty stream file");
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string cell;
    LoanEvent<double> e;
    if (!std::getline(row, cell, ',')) throw std::invalid_argument("bad stream row: " + line);
    e.t = std::stoll(cell);
    if (!std::getline(row, cell, ',')) throw std::invalid_argument("bad stream row: " + line);
    e.size = std::stod(cell);
    if (!std::getline(row, cell, ',')) throw std::invalid_argument("bad stream row: " + line);
    e.duration = std::stoll(cell);
    stream.push_back(e);
  }
  validate_stream(stream);
  return stream;
}

// columns: t, demand, supply, utilization, price, revenue_step, revenue_cum,
// rejected, alpha_1..alpha_N
template <typename R>
void write_trajectory_csv(const std::filesystem::path& path, const RunTrajectory<R>& run) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string());
  const std::size_t n_alpha = run.alphas.empty() ? 0 : run.alphas.front().size();
  out << "t,demand,supply,utilization,price,revenue_step,revenue_cum,rejected";
  for (std::size_t n = 1; n <= n_alpha; ++n) out << ",alpha_" << n;
  out << '\n';
  Accumulator<R> cum;
  for (std::size_t i = 0; i < run.states.size(); ++i) {
    const auto& st = run.states[i];
    cum.add(run.ledger.per_step[i]);
    out << st.t << ',' << format_double(scalar_ops<R>::to_double(st.active_demand)) << ','
        << format_double(scalar_ops<R>::to_double(st.supply)) << ','
        << format_double(scalar_ops<R>::to_double(st.utilization)) << ','
        << format_double(scalar_ops<R>::to_double(run.prices[i])) << ','
        << format_double(scalar_ops<R>::to_double(run.ledger.per_step[i])) << ','
        << format_double(scalar_ops<R>::to_double(cum.value())) << ',' << (st.rejected ? 1 : 0);
    for (std::size_t n = 0; n < n_alpha; ++n)
      out << ',' << format_double(scalar_ops<R>::to_double(run.alphas[i][n]));
    out << '\n';
  }
}

// columns: t, asset, size_c1..size_cC, duration
inline void write_multi_stream_csv(const std::filesystem::path& path,
                                   const MultiEventStream& stream, long long collaterals) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string());
  out << "t,asset";
  for (long long c = 1; c <= collaterals; ++c) out << ",size_c" << c;
  out << ",duration\n";
  for (const auto& e : stream) {
    out << e.t << ',' << e.asset;
    for (long long c = 0; c < collaterals; ++c) out << ',' << format_double(e.sizes[c]);
    out << ',' << e.duration << '\n';
  }
}

inline MultiEventStream read_multi_stream_csv(const std::filesystem::path& path,
                                              long long collaterals) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open " + path.string());
  MultiEventStream stream;
  std::string line;
  if (!std::getline(in, line)) throw std::invalid_argument("empty stream file");
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string cell;
    MultiLoanEvent e;
    auto next = [&]() {
      if (!std::getline(row, cell, ',')) throw std::invalid_argument("bad row: " + line);
      return cell;
    };
    e.t = std::stoll(next());
    e.asset = std::stoll(next());
    e.sizes.resize(collaterals);
    for (long long c = 0; c < collaterals; ++c) e.sizes[c] = std::stod(next());
    e.duration = std::stoll(next());
    stream.push_back(e);
  }
  return stream;
}

}  // namespace lendsim
