#include "seroifr/io.hpp"

#include <algorithm>
#include <map>

#include "seroifr/common.hpp"
#include "seroifr/csv.hpp"

namespace seroifr {

void write_draws_csv(const std::filesystem::path& path, const PosteriorDraws& draws) {
  std::vector<std::string> header = {"chain", "iteration"};
  header.insert(header.end(), draws.names.begin(), draws.names.end());
  CsvWriter out(path, header);
  std::vector<std::string> row(header.size());
  for (int k = 0; k < draws.n_chains(); ++k) {
    const auto& ch = draws.constrained[k];
    for (Eigen::Index it = 0; it < ch.rows(); ++it) {
      row[0] = std::to_string(k + 1);
      row[1] = std::to_string(it + 1);
      for (Eigen::Index j = 0; j < ch.cols(); ++j) row[2 + j] = CsvWriter::num(ch(it, j));
      out.row(row);
    }
  }
}

StoredDraws read_draws_csv(const std::filesystem::path& path) {
  CsvTable t(path);
  t.require_columns({"chain", "iteration"});
  if (t.rows() == 0) fail(Errc::no_draws, path.string() + ": no draws");

  StoredDraws out;
  // column names in file order, skipping chain/iteration
  std::ifstream in(path);
  std::string header_line;
  std::getline(in, header_line);
  std::string cur;
  std::vector<std::string> header;
  for (char c : header_line) {
    if (c == ',') {
      header.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  header.push_back(cur);
  for (const auto& h : header)
    if (h != "chain" && h != "iteration") out.names.push_back(h);

  std::map<long, std::vector<std::vector<double>>> per_chain;
  for (std::size_t r = 0; r < t.rows(); ++r) {
    long chain = t.integer(r, "chain");
    std::vector<double> row;
    row.reserve(out.names.size());
    for (const auto& name : out.names) row.push_back(t.real(r, name));
    per_chain[chain].push_back(std::move(row));
  }
  std::size_t len = per_chain.begin()->second.size();
  for (const auto& [id, rows] : per_chain) {
    if (rows.size() != len)
      fail(Errc::schema_violation, path.string() + ": chains have unequal lengths (file truncated?)");
    Eigen::MatrixXd m(rows.size(), out.names.size());
    for (std::size_t i = 0; i < rows.size(); ++i)
      for (std::size_t j = 0; j < out.names.size(); ++j) m(i, j) = rows[i][j];
    out.chains.push_back(std::move(m));
  }
  return out;
}

void write_sampler_stats_csv(const std::filesystem::path& path, const RawDraws& raw) {
  CsvWriter out(path,
                {"chain", "iteration", "accept_stat", "step_size", "tree_depth", "n_leapfrog", "divergent",
                 "energy"});
  for (int k = 0; k < raw.n_chains(); ++k) {
    const ChainStats& st = raw.stats[k];
    for (std::size_t it = 0; it < st.accept_stat.size(); ++it)
      out.row({std::to_string(k + 1), std::to_string(it + 1), CsvWriter::num(st.accept_stat[it]),
               CsvWriter::num(st.step_size), std::to_string(st.tree_depth[it]),
               std::to_string(st.n_leapfrog[it]), std::to_string(static_cast<int>(st.divergent[it])),
               CsvWriter::num(st.energy[it])});
  }
}

void write_diagnostics_csv(const std::filesystem::path& path, const ConvergenceReport& report) {
  CsvWriter out(path, {"parameter", "rhat", "ess", "group"});
  for (const auto& p : report.params)
    out.row({p.name, p.rhat ? CsvWriter::num(*p.rhat) : "NA", p.ess ? CsvWriter::num(*p.ess) : "NA",
             p.group});
}

void write_trace_csv(const std::filesystem::path& path, const StoredDraws& draws,
                     const std::string& param) {
  auto it = std::find(draws.names.begin(), draws.names.end(), param);
  if (it == draws.names.end())
    fail(Errc::bad_config, "unknown parameter '" + param + "' requested for trace export");
  Eigen::Index col = it - draws.names.begin();
  CsvWriter out(path, {"chain", "iteration", "value"});
  for (std::size_t k = 0; k < draws.chains.size(); ++k)
    for (Eigen::Index i = 0; i < draws.chains[k].rows(); ++i)
      out.row({std::to_string(k + 1), std::to_string(i + 1), CsvWriter::num(draws.chains[k](i, col))});
}

void write_curves_csv(const std::filesystem::path& path, const std::vector<CurveSummary>& curves) {
  CsvWriter out(path, {"location_id", "kind", "age", "mean", "median", "lo95", "hi95", "lo80", "hi80"});
  for (const auto& c : curves) {
    std::string kind = c.kind == CurveKind::sero ? "SERO" : "IFR";
    for (int age = 0; age <= 100; ++age)
      out.row({c.location_id, kind, std::to_string(age), CsvWriter::num(c.mean[age]),
               CsvWriter::num(c.median[age]), CsvWriter::num(c.lo95[age]), CsvWriter::num(c.hi95[age]),
               CsvWriter::num(c.lo80[age]), CsvWriter::num(c.hi80[age])});
  }
}

void write_population_ifr_csv(const std::filesystem::path& path,
                              const std::vector<PopulationIfrSummary>& rows) {
  CsvWriter out(path, {"location_id", "mode", "mean", "median", "lo95", "hi95"});
  for (const auto& r : rows)
    out.row({r.location_id, r.mode, CsvWriter::num(r.mean), CsvWriter::num(r.median),
             CsvWriter::num(r.lo95), CsvWriter::num(r.hi95)});
}

void write_age60_csv(const std::filesystem::path& path, const std::vector<Age60Row>& rows) {
  CsvWriter out(path, {"location_id", "median", "lo80", "hi80", "lo95", "hi95", "benchmark_flag"});
  for (const auto& r : rows)
    out.row({r.location_id, CsvWriter::num(r.summary.q.median), CsvWriter::num(r.summary.q.lo80),
             CsvWriter::num(r.summary.q.hi80), CsvWriter::num(r.summary.q.lo95),
             CsvWriter::num(r.summary.q.hi95), r.summary.benchmark_flag});
}

void write_rogan_gladen_csv(const std::filesystem::path& path, const std::vector<RoganGladenRow>& rows) {
  CsvWriter out(path, {"location_id", "age_lo", "age_hi", "estimate", "lo95", "hi95"});
  for (const auto& r : rows) {
    auto hi = r.bin.hi_label();
    out.row({r.location_id, std::to_string(r.bin.lo_label()), hi ? std::to_string(*hi) : "",
             CsvWriter::num(r.est.estimate), CsvWriter::num(r.est.lo95), CsvWriter::num(r.est.hi95)});
  }
}

void write_density_csv(const std::filesystem::path& path, const AgeDensity& f) {
  CsvWriter out(path, {"age", "density"});
  for (int a = 0; a <= 100; ++a) out.row({std::to_string(a), CsvWriter::num(f.grid_values[a])});
}

}  // namespace seroifr
