#include "wgm/dtn.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "wgm/error.hpp"

namespace wgm
{

namespace
{

std::string list_modes(const std::vector<int> &idx)
{
  std::string s;
  for (std::size_t i = 0; i < idx.size(); ++i)
  {
    s += (i ? "," : "") + std::to_string(idx[i]);
  }
  return s;
}

std::vector<int> degenerate_members(const std::vector<ModeCluster> &clusters)
{
  std::vector<int> out;
  for (const auto &cl : clusters)
  {
    if (cl.degenerate)
    {
      out.insert(out.end(), cl.members.begin(), cl.members.end());
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

void append_complex(std::string &out, Complex z)
{
  char buf[64];
  const int n = std::snprintf(buf, sizeof buf, "%.17g %.17g\n", z.real(), z.imag());
  out.append(buf, static_cast<std::size_t>(n));
}

std::string fmt_double(double v)
{
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

class Reader
{
public:
  explicit Reader(std::string_view text) : text_(text) {}

  std::string_view next()
  {
    if (pos_ >= text_.size())
    {
      fail("unexpected end of file", line_ + 1, pos_);
    }
    start_ = pos_;
    ++line_;
    const std::size_t eol = text_.find('\n', pos_);
    std::string_view l = text_.substr(pos_, eol == std::string_view::npos ? eol : eol - pos_);
    pos_ = eol == std::string_view::npos ? text_.size() : eol + 1;
    if (!l.empty() && l.back() == '\r')
    {
      l.remove_suffix(1);
    }
    return l;
  }

  [[noreturn]] void fail(const std::string &msg) const { fail(msg, line_, start_); }

  [[noreturn]] static void fail(const std::string &msg, std::size_t line, std::size_t offset)
  {
    throw ParseError("dtn", line, "byte offset " + std::to_string(offset) + ": " + msg);
  }

  std::vector<std::string_view> tokens()
  {
    std::string_view l = next();
    std::vector<std::string_view> t;
    std::size_t i = 0;
    while (i < l.size())
    {
      while (i < l.size() && (l[i] == ' ' || l[i] == '\t')) ++i;
      std::size_t j = i;
      while (j < l.size() && l[j] != ' ' && l[j] != '\t') ++j;
      if (j > i) t.push_back(l.substr(i, j - i));
      i = j;
    }
    return t;
  }

  // "<key> <value>" line; returns the value token.
  std::string_view keyed(std::string_view key)
  {
    auto t = tokens();
    if (t.size() != 2 || t[0] != key)
    {
      fail("expected '" + std::string(key) + " <value>'");
    }
    return t[1];
  }

  void expect(std::string_view word)
  {
    auto t = tokens();
    if (t.size() != 1 || t[0] != word)
    {
      fail("expected '" + std::string(word) + "'");
    }
  }

  double real(std::string_view s) const
  {
    double v = 0.0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size())
    {
      fail("invalid number '" + std::string(s) + "'");
    }
    return v;
  }

  long integer(std::string_view s) const
  {
    long v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size())
    {
      fail("invalid integer '" + std::string(s) + "'");
    }
    return v;
  }

  Complex complex()
  {
    auto t = tokens();
    if (t.size() != 2)
    {
      fail("expected '<re> <im>'");
    }
    return {real(t[0]), real(t[1])};
  }

  bool at_end() const { return text_.find_first_not_of(" \t\r\n", pos_) == std::string_view::npos; }

private:
  std::string_view text_;
  std::size_t pos_ = 0, start_ = 0, line_ = 0;
};

ModeClass parse_class(const Reader &r, std::string_view s)
{
  for (ModeClass c : {ModeClass::Propagating, ModeClass::Evanescent, ModeClass::Complex})
  {
    if (s == class_name(c)) return c;
  }
  r.fail("unknown mode class '" + std::string(s) + "'");
}

}  // namespace

std::string DtnMatrix::param(const std::string &key) const
{
  for (const auto &[k, v] : params)
  {
    if (k == key) return v;
  }
  return {};
}

VectorXcd expansion_coeffs(const PencilBlocks &blocks, double omega,
                           const std::vector<Mode> &modes,
                           const std::vector<ModeCluster> &clusters, const VectorXcd &trace,
                           bool skip_degenerate)
{
  if (trace.size() != blocks.num_edge_dofs())
  {
    throw Error(ErrorKind::Validation, "dtn", "trace length does not match the edge dofs");
  }
  const auto bad = degenerate_members(clusters);
  if (!bad.empty() && !skip_degenerate)
  {
    throw Error(ErrorKind::Validation, "dtn", "degenerate cluster; excluded modes: " + list_modes(bad));
  }
  const VectorXcd At = orth_operator(blocks, omega) * trace;
  VectorXcd coeff = VectorXcd::Constant(static_cast<Eigen::Index>(modes.size()),
                                        Complex(std::numeric_limits<double>::quiet_NaN(), 0.0));
  for (const auto &cl : clusters)
  {
    if (cl.degenerate) continue;
    const int m = static_cast<int>(cl.members.size());
    VectorXcd rhs(m);
    for (int k = 0; k < m; ++k)
    {
      rhs[k] = modes[cl.members[k]].u.dot(At);  // a_orth(trace, u_k)
    }
    const VectorXcd a = cl.gram.fullPivLu().solve(rhs);
    for (int k = 0; k < m; ++k)
    {
      coeff[cl.members[k]] = a[k];
    }
  }
  return coeff;
}

EnergyTest outgoing_sign(const std::vector<Mode> &modes, const std::vector<ModeCluster> &clusters)
{
  int plus = 0, minus = 0;
  for (const auto &cl : clusters)
  {
    if (cl.degenerate) continue;
    for (std::size_t k = 0; k < cl.members.size(); ++k)
    {
      const Mode &m = modes[cl.members[k]];
      const double g = cl.gram(k, k).real();
      if (g == 0.0 || m.classification != ModeClass::Propagating) continue;
      // power = -s g / (2 w beta) > 0
      (g < 0.0 ? plus : minus)++;
    }
  }
  EnergyTest t;
  if (plus > 0 && minus > 0)
  {
    throw Error(ErrorKind::Validation, "dtn",
                "energy test: propagating modes disagree on the outgoing sign (" + std::to_string(plus) +
                  " vs " + std::to_string(minus) + ")");
  }
  t.votes = plus + minus;
  if (t.votes > 0)
  {
    t.sign = minus > 0 ? -1 : 1;
    t.basis = "propagating";
  }
  else
  {
    // Evanescent Robin terms are reactive with mode-dependent sign; keep the convention.
    t.sign = 1;
    t.basis = "default";
  }
  return t;
}

DtnMatrix build_dtn(const PencilBlocks &blocks, double omega, const std::vector<Mode> &modes,
                    const std::vector<ModeCluster> &clusters, const DtnOptions &opts)
{
  const auto bad = degenerate_members(clusters);
  if (!bad.empty() && !opts.skip_degenerate)
  {
    throw Error(ErrorKind::Validation, "dtn",
                "degenerate cluster (singular Gram matrix); excluded modes: " + list_modes(bad));
  }
  for (const auto &m : modes)
  {
    if (m.beta == Complex(0.0, 0.0))
    {
      throw Error(ErrorKind::Validation, "dtn", "mode with beta = 0");
    }
  }

  DtnMatrix d;
  d.omega = omega;
  d.fingerprint = opts.fingerprint;
  d.params = opts.params;

  EnergyTest et;
  if (opts.sign == 0)
  {
    et = outgoing_sign(modes, clusters);
  }
  else
  {
    et.sign = opts.sign > 0 ? 1 : -1;
    et.basis = "fixed";
  }
  d.sign = et.sign;
  d.params.emplace_back("energy_test", et.basis);
  if (!bad.empty())
  {
    d.params.emplace_back("excluded_modes", list_modes(bad));
  }

  const SparseMatrix A = orth_operator(blocks, omega);
  const int ne = blocks.num_edge_dofs();
  std::vector<int> order;
  for (const auto &cl : clusters)
  {
    if (!cl.degenerate) order.insert(order.end(), cl.members.begin(), cl.members.end());
  }
  std::sort(order.begin(), order.end());
  std::vector<int> slot(modes.size(), -1);
  for (std::size_t i = 0; i < order.size(); ++i)
  {
    slot[order[i]] = static_cast<int>(i);
  }

  const int m = static_cast<int>(order.size());
  d.W.resize(ne, m);
  d.factors.resize(m);
  const Complex I(0.0, 1.0);
  for (int i = 0; i < m; ++i)
  {
    const Mode &md = modes[order[i]];
    d.modes.push_back({md.beta, md.beta_sq, md.classification});
    d.W.col(i) = A * md.u;
    d.factors[i] = static_cast<double>(d.sign) * I / md.beta;
  }
  for (const auto &cl : clusters)
  {
    if (cl.degenerate) continue;
    DtnCluster c;
    for (int k : cl.members) c.members.push_back(slot[k]);
    c.gram = cl.gram;
    d.clusters.push_back(std::move(c));
  }
  std::sort(d.clusters.begin(), d.clusters.end(),
            [](const DtnCluster &a, const DtnCluster &b) { return a.members[0] < b.members[0]; });
  d.N = dtn_from_factors(d, m);

  // Complex symmetry holds when every contributing mode is a real vector.
  bool real_vectors = true;
  for (int i : order)
  {
    real_vectors = real_vectors && modes[i].u.imag().norm() <= 1e-12 * modes[i].u.norm();
  }
  std::string sym = "n/a";
  if (real_vectors && m > 0)
  {
    const double asym = (d.N - d.N.transpose()).norm();
    sym = asym <= 1e-8 * d.N.norm() ? "yes" : "no";
  }
  d.params.emplace_back("complex_symmetric", sym);
  return d;
}

MatrixXcd dtn_from_factors(const DtnMatrix &dtn, int count)
{
  const int ne = static_cast<int>(dtn.W.rows());
  const int m = static_cast<int>(dtn.W.cols());
  MatrixXcd M = MatrixXcd::Zero(m, m);
  for (const auto &cl : dtn.clusters)
  {
    if (*std::max_element(cl.members.begin(), cl.members.end()) >= count) continue;
    const int k = static_cast<int>(cl.members.size());
    const MatrixXcd Ginv = cl.gram.fullPivLu().inverse();
    for (int r = 0; r < k; ++r)
    {
      for (int c = 0; c < k; ++c)
      {
        M(cl.members[r], cl.members[c]) = dtn.factors[cl.members[r]] * Ginv(r, c);
      }
    }
  }
  if (m == 0)
  {
    return MatrixXcd::Zero(ne, ne);
  }
  const MatrixXcd WM = dtn.W * M;
  return WM * dtn.W.adjoint();
}

double truncation_indicator(const DtnMatrix &dtn, double fraction)
{
  const int m = dtn.num_modes();
  const double nn = dtn.N.norm();
  if (m == 0 || nn == 0.0) return 0.0;
  const int count = static_cast<int>(std::ceil(fraction * m));
  return (dtn.N - dtn_from_factors(dtn, count)).norm() / nn;
}

VectorXcd apply_dtn(const DtnMatrix &dtn, const VectorXcd &trace)
{
  if (trace.size() != dtn.N.cols())
  {
    throw Error(ErrorKind::Validation, "dtn",
                "trace length " + std::to_string(trace.size()) + " does not match n_e = " +
                  std::to_string(dtn.N.cols()));
  }
  return dtn.N * trace;
}

std::string serialize_dtn(const DtnMatrix &dtn, bool dense)
{
  const Eigen::Index ne = dtn.N.rows();
  const int m = dtn.num_modes();
  std::string out;
  out.reserve(static_cast<std::size_t>((dense ? ne * ne : 0) + ne * m + 64) * 48);
  out += "WGDTN1\n";
  out += "omega " + fmt_double(dtn.omega) + "\n";
  out += "n_e " + std::to_string(ne) + "\n";
  out += "modes " + std::to_string(m) + "\n";
  out += std::string("sign ") + (dtn.sign > 0 ? "+1" : "-1") + "\n";
  out += "fingerprint " + (dtn.fingerprint.empty() ? std::string("-") : dtn.fingerprint) + "\n";
  out += "units c=1 lengths=dimensionless\n";
  for (const auto &[k, v] : dtn.params)
  {
    out += "param " + k + " " + v + "\n";
  }
  out += "betas\n";
  for (int j = 0; j < m; ++j)
  {
    const auto &md = dtn.modes[j];
    out += std::to_string(j) + " " + fmt_double(md.beta.real()) + " " + fmt_double(md.beta.imag()) +
           " " + fmt_double(md.beta_sq.real()) + " " + fmt_double(md.beta_sq.imag()) + " " +
           class_name(md.classification) + "\n";
  }
  out += dense ? "matrix dense\n" : "matrix omitted\n";
  if (dense)
  {
    for (Eigen::Index r = 0; r < ne; ++r)
      for (Eigen::Index c = 0; c < ne; ++c) append_complex(out, dtn.N(r, c));
  }
  out += "factored\nW\n";
  for (Eigen::Index r = 0; r < dtn.W.rows(); ++r)
    for (int c = 0; c < m; ++c) append_complex(out, dtn.W(r, c));
  out += "factors\n";
  for (int j = 0; j < m; ++j) append_complex(out, dtn.factors[j]);
  out += "clusters " + std::to_string(dtn.clusters.size()) + "\n";
  for (const auto &cl : dtn.clusters)
  {
    out += "cluster " + std::to_string(cl.members.size());
    for (int k : cl.members) out += " " + std::to_string(k);
    out += "\n";
    for (Eigen::Index r = 0; r < cl.gram.rows(); ++r)
      for (Eigen::Index c = 0; c < cl.gram.cols(); ++c) append_complex(out, cl.gram(r, c));
  }
  out += "end\n";
  return out;
}

DtnMatrix parse_dtn(std::string_view text)
{
  Reader r(text);
  DtnMatrix d;
  {
    auto t = r.tokens();
    if (t.size() != 1 || t[0].substr(0, 5) != "WGDTN")
    {
      r.fail("missing WGDTN magic");
    }
    if (t[0] != "WGDTN1")
    {
      r.fail("unsupported DtN file version '" + std::string(t[0]) + "' (expected WGDTN1)");
    }
  }
  d.omega = r.real(r.keyed("omega"));
  const long ne = r.integer(r.keyed("n_e"));
  const long m = r.integer(r.keyed("modes"));
  if (ne < 0 || m < 0)
  {
    r.fail("negative size");
  }
  {
    auto s = r.keyed("sign");
    if (s != "+1" && s != "-1") r.fail("sign must be +1 or -1");
    d.sign = s == "+1" ? 1 : -1;
  }
  {
    auto f = r.keyed("fingerprint");
    d.fingerprint = f == "-" ? std::string() : std::string(f);
  }
  {
    auto t = r.tokens();
    if (t.size() != 3 || t[0] != "units" || t[1] != "c=1" || t[2] != "lengths=dimensionless")
    {
      r.fail("expected 'units c=1 lengths=dimensionless'");
    }
  }
  for (;;)
  {
    auto t = r.tokens();
    if (t.size() == 1 && t[0] == "betas") break;
    if (t.size() != 3 || t[0] != "param")
    {
      r.fail("expected 'param <key> <value>' or 'betas'");
    }
    d.params.emplace_back(std::string(t[1]), std::string(t[2]));
  }
  for (long j = 0; j < m; ++j)
  {
    auto t = r.tokens();
    if (t.size() != 6 || r.integer(t[0]) != j)
    {
      r.fail("expected '" + std::to_string(j) + " <re b> <im b> <re b^2> <im b^2> <class>'");
    }
    d.modes.push_back({{r.real(t[1]), r.real(t[2])}, {r.real(t[3]), r.real(t[4])},
                       parse_class(r, t[5])});
  }
  bool dense = false;
  {
    auto mode = r.keyed("matrix");
    if (mode != "dense" && mode != "omitted") r.fail("matrix must be 'dense' or 'omitted'");
    dense = mode == "dense";
  }
  if (dense)
  {
    d.N.resize(ne, ne);
    for (long i = 0; i < ne; ++i)
      for (long j = 0; j < ne; ++j) d.N(i, j) = r.complex();
  }
  r.expect("factored");
  r.expect("W");
  d.W.resize(ne, m);
  for (long i = 0; i < ne; ++i)
    for (long j = 0; j < m; ++j) d.W(i, j) = r.complex();
  r.expect("factors");
  d.factors.resize(m);
  for (long j = 0; j < m; ++j) d.factors[j] = r.complex();
  const long nc = r.integer(r.keyed("clusters"));
  std::vector<int> seen(static_cast<std::size_t>(m), 0);
  for (long c = 0; c < nc; ++c)
  {
    auto t = r.tokens();
    if (t.size() < 3 || t[0] != "cluster" || r.integer(t[1]) != static_cast<long>(t.size()) - 2)
    {
      r.fail("expected 'cluster <size> <members...>'");
    }
    DtnCluster cl;
    for (std::size_t k = 2; k < t.size(); ++k)
    {
      const long idx = r.integer(t[k]);
      if (idx < 0 || idx >= m || seen[idx]++)
      {
        r.fail("invalid or repeated cluster member " + std::string(t[k]));
      }
      cl.members.push_back(static_cast<int>(idx));
    }
    const auto k = static_cast<Eigen::Index>(cl.members.size());
    cl.gram.resize(k, k);
    for (Eigen::Index i = 0; i < k; ++i)
      for (Eigen::Index j = 0; j < k; ++j) cl.gram(i, j) = r.complex();
    d.clusters.push_back(std::move(cl));
  }
  r.expect("end");
  if (!r.at_end())
  {
    r.fail("trailing content after 'end'");
  }
  if (!dense)
  {
    d.N = dtn_from_factors(d, static_cast<int>(m));
  }
  return d;
}

void export_dtn(const DtnMatrix &dtn, const std::filesystem::path &path, bool dense)
{
  const std::string text = serialize_dtn(dtn, dense);
  std::ofstream f(path, std::ios::binary);
  if (!f)
  {
    throw Error(ErrorKind::Io, "dtn", "cannot open '" + path.string() + "' for writing");
  }
  f.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!f)
  {
    throw Error(ErrorKind::Io, "dtn", "write to '" + path.string() + "' failed");
  }
}

DtnMatrix import_dtn(const std::filesystem::path &path,
                     const std::optional<std::string> &expected_fingerprint)
{
  std::ifstream f(path, std::ios::binary);
  if (!f)
  {
    throw Error(ErrorKind::Io, "dtn", "cannot open '" + path.string() + "'");
  }
  std::ostringstream ss;
  ss << f.rdbuf();
  DtnMatrix d = parse_dtn(ss.str());
  if (expected_fingerprint && d.fingerprint != *expected_fingerprint)
  {
    throw Error(ErrorKind::Validation, "dtn",
                "mesh fingerprint mismatch: file has '" + d.fingerprint + "', mesh is '" +
                  *expected_fingerprint + "'");
  }
  return d;
}

}  // namespace wgm
