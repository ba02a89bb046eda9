// Python bindings for the mode solver and DtN builder.
#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "wgm/analytic.hpp"
#include "wgm/dtn.hpp"
#include "wgm/error.hpp"
#include "wgm/pipeline.hpp"

namespace py = pybind11;
using namespace wgm;

namespace
{

// Everything a solve needs again later (verify, DtN, export).
struct Solution
{
  Mesh mesh;
  MaterialMap materials;
  SolveOptions opts;
  SolveResult result;
};

PencilKind pencil_kind(const std::string &s)
{
  if (s == "vd1") return PencilKind::Vd1;
  if (s == "vd2") return PencilKind::Vd2;
  throw Error(ErrorKind::Validation, "python", "pencil must be 'vd1' or 'vd2'");
}

const char *norm_name(NormState s)
{
  switch (s)
  {
    case NormState::Unnormalized: return "unnormalized";
    case NormState::Normalized: return "normalized";
    case NormState::Degenerate: return "degenerate";
  }
  return "";
}

py::dict check_dict(const CheckResult &c)
{
  py::dict d;
  d["name"] = c.name;
  d["pass"] = c.pass;
  d["value"] = c.value;
  d["threshold"] = c.threshold;
  d["detail"] = c.detail;
  return d;
}

// Kept alive for the lifetime of the interpreter.
py::handle g_base, g_validation, g_cutoff, g_solver, g_io;

py::handle exc_class(ErrorKind k)
{
  switch (k)
  {
    case ErrorKind::Validation: return g_validation;
    case ErrorKind::Cutoff: return g_cutoff;
    case ErrorKind::Solver: return g_solver;
    case ErrorKind::Io: return g_io;
  }
  return g_base;
}

py::handle new_exception(py::module_ &m, const char *name, py::handle base)
{
  const std::string full = std::string("wgmodes._core.") + name;
  PyObject *cls = PyErr_NewException(full.c_str(), base.ptr(), nullptr);
  m.add_object(name, py::handle(cls));
  return py::handle(cls);
}

}  // namespace

PYBIND11_MODULE(_core, m)
{
  m.doc() = "Electromagnetic waveguide modes and modal Dirichlet-to-Neumann operators";

  g_base = new_exception(m, "WgmError", PyExc_RuntimeError);
  g_validation = new_exception(m, "ValidationError", g_base);
  g_cutoff = new_exception(m, "CutoffError", g_base);
  g_solver = new_exception(m, "SolverError", g_base);
  g_io = new_exception(m, "IoError", g_base);
  py::register_exception_translator([](std::exception_ptr p) {
    try
    {
      if (p) std::rethrow_exception(p);
    }
    catch (const Error &e)
    {
      py::gil_scoped_acquire gil;
      const py::handle cls = exc_class(e.kind());
      py::object inst = cls(py::str(e.what()));
      inst.attr("module") = e.module();
      inst.attr("kind") = kind_name(e.kind());
      inst.attr("exit_code") = exit_code(e.kind());
      PyErr_SetObject(cls.ptr(), inst.ptr());
    }
  });

  py::class_<Mesh>(m, "Mesh")
    .def_static("from_text", [](const std::string &t) { return parse_mesh(t); }, py::arg("text"))
    .def_static("read", &read_mesh_file, py::arg("path"))
    .def_static("rectangle", &generate_rect_mesh, py::arg("a"), py::arg("b"), py::arg("nx"), py::arg("ny"))
    .def("refine", &refine_uniform)
    .def("serialize", &serialize_mesh)
    .def("write", [](const Mesh &mesh, const std::string &path) { write_mesh_file(mesh, path); }, py::arg("path"))
    .def("fingerprint", [](const Mesh &mesh) { return fingerprint_hex(mesh_fingerprint(mesh)); })
    .def_property_readonly("num_nodes", &Mesh::num_nodes)
    .def_property_readonly("num_triangles", &Mesh::num_triangles)
    .def_property_readonly("num_edges", &Mesh::num_edges)
    .def_property_readonly("area", &Mesh::total_area)
    .def_property_readonly("nodes",
                           [](const Mesh &mesh) {
                             Eigen::MatrixX2d xy(mesh.num_nodes(), 2);
                             for (std::size_t i = 0; i < mesh.num_nodes(); ++i)
                               xy.row(i) << mesh.nodes()[i].x, mesh.nodes()[i].y;
                             return xy;
                           })
    .def_property_readonly("triangles",
                           [](const Mesh &mesh) {
                             Eigen::Matrix<int, Eigen::Dynamic, 3, Eigen::RowMajor> t(mesh.num_triangles(), 3);
                             for (std::size_t k = 0; k < mesh.num_triangles(); ++k)
                               for (int j = 0; j < 3; ++j) t(k, j) = mesh.triangles()[k].v[j];
                             return t;
                           })
    .def_property_readonly("regions", [](const Mesh &mesh) {
      std::vector<std::string> r;
      for (const auto &t : mesh.triangles()) r.push_back(t.region);
      return r;
    });

  py::class_<MaterialMap>(m, "Materials")
    .def_static("uniform", &uniform_materials, py::arg("mesh"), py::arg("epsilon") = 1.0, py::arg("mu") = 1.0)
    .def_static("read", [](const std::string &path, const Mesh &mesh) { return read_materials_file(path, mesh.num_nodes()); },
                py::arg("path"), py::arg("mesh"))
    .def_static("from_text",
                [](const std::string &text, const Mesh &mesh, const std::string &base_dir) {
                  return parse_materials(text, base_dir, mesh.num_nodes());
                },
                py::arg("text"), py::arg("mesh"), py::arg("base_dir") = ".")
    .def_static("constants",
                [](const std::map<std::string, std::pair<double, double>> &table) {
                  MaterialMap mm;
                  for (const auto &[region, em] : table) mm.set_constant(region, em.first, em.second);
                  return mm;
                },
                py::arg("table"))
    .def("regions", [](const MaterialMap &mm) {
      std::vector<std::string> r;
      for (const auto &kv : mm.regions()) r.push_back(kv.first);
      return r;
    });

  py::class_<Mode>(m, "Mode")
    .def_readonly("beta_sq", &Mode::beta_sq)
    .def_readonly("beta", &Mode::beta)
    .def_property_readonly("classification", [](const Mode &md) { return std::string(class_name(md.classification)); })
    .def_readonly("u", &Mode::u)
    .def_readonly("p", &Mode::p)
    .def_readonly("residual", &Mode::residual)
    .def_readonly("schur_residual", &Mode::schur_residual)
    .def_property_readonly("norm_state", [](const Mode &md) { return std::string(norm_name(md.norm_state)); })
    .def_readonly("norm_sign", &Mode::norm_sign)
    .def("__repr__", [](const Mode &md) {
      std::ostringstream os;
      os << "<Mode beta=" << md.beta << " " << class_name(md.classification) << ">";
      return os.str();
    });

  py::class_<Solution>(m, "Solution")
    .def_property_readonly("modes", [](const Solution &s) { return s.result.modes; })
    .def_property_readonly("clusters",
                           [](const Solution &s) {
                             std::vector<std::vector<int>> out;
                             for (const auto &c : s.result.clusters) out.push_back(c.members);
                             return out;
                           })
    .def_property_readonly("omega", [](const Solution &s) { return s.result.omega; })
    .def_property_readonly("sigma", [](const Solution &s) { return s.result.sigma; })
    .def_property_readonly("cutoff_distance", [](const Solution &s) { return s.result.cutoff_distance; })
    .def_property_readonly("num_edge_dofs", [](const Solution &s) { return s.result.dofs.num_edge_dofs(); })
    .def_property_readonly("num_vertex_dofs", [](const Solution &s) { return s.result.dofs.num_vertex_dofs(); })
    .def_property_readonly("excluded", [](const Solution &s) { return s.result.excluded; })
    .def("a_orth",
         [](const Solution &s, const VectorXcd &x, const VectorXcd &y) { return a_orth(s.result.blocks, s.result.omega, x, y); },
         py::arg("x"), py::arg("y"))
    .def("orthogonality_matrix",
         [](const Solution &s) { return orthogonality_matrix(s.result.blocks, s.result.omega, s.result.modes); })
    .def("verify",
         [](const Solution &s) {
           py::list out;
           for (const auto &c : verify_modes(s.mesh, s.materials, s.opts, s.result).checks) out.append(check_dict(c));
           return out;
         })
    .def("write_mode_table", [](const Solution &s, const std::string &path) { write_mode_table(path, s.result.modes); },
         py::arg("path"))
    .def("export_fields",
         [](const Solution &s, const std::string &path) { export_fields(path, s.mesh, s.result.dofs, s.result.modes); },
         py::arg("path"))
    .def("build_dtn",
         [](const Solution &s, int sign, bool skip_degenerate) {
           DtnOptions o;
           o.sign = sign;
           o.skip_degenerate = skip_degenerate;
           o.fingerprint = fingerprint_hex(mesh_fingerprint(s.mesh));
           o.params = {{"pencil", s.opts.pencil == PencilKind::Vd1 ? "vd1" : "vd2"},
                       {"num_modes", std::to_string(s.opts.num_modes)}};
           return build_dtn(s.result.blocks, s.result.omega, s.result.modes, s.result.clusters, o);
         },
         py::arg("sign") = 0, py::arg("skip_degenerate") = false);

  m.def(
    "solve",
    [](const Mesh &mesh, double omega, std::optional<MaterialMap> materials, int num_modes,
       std::optional<Complex> shift, const std::string &pencil, int threads, double real_tol, double cluster_tol,
       double orth_tol, double degenerate_tol, double solver_tol, double cutoff_tol) {
      Solution s;
      s.mesh = mesh;
      s.materials = materials ? *materials : uniform_materials(mesh, 1.0, 1.0);
      s.opts.omega = omega;
      s.opts.num_modes = num_modes;
      s.opts.shift = shift;
      s.opts.pencil = pencil_kind(pencil);
      s.opts.threads = threads;
      s.opts.tol = {real_tol, cluster_tol, orth_tol, degenerate_tol};
      s.opts.solver_tol = solver_tol;
      s.opts.cutoff_tol = cutoff_tol;
      {
        py::gil_scoped_release release;
        s.result = solve_modes(s.mesh, s.materials, s.opts);
      }
      return s;
    },
    py::arg("mesh"), py::arg("omega"), py::arg("materials") = py::none(), py::arg("num_modes") = 12,
    py::arg("shift") = py::none(), py::arg("pencil") = "vd1", py::arg("threads") = 1, py::arg("real_tol") = 1e-8,
    py::arg("cluster_tol") = 1e-6, py::arg("orth_tol") = 1e-8, py::arg("degenerate_tol") = 1e-10,
    py::arg("solver_tol") = 1e-12, py::arg("cutoff_tol") = 1e-6);

  py::class_<DtnMatrix>(m, "DtnMatrix")
    .def_readonly("omega", &DtnMatrix::omega)
    .def_readonly("sign", &DtnMatrix::sign)
    .def_readonly("fingerprint", &DtnMatrix::fingerprint)
    .def_readonly("N", &DtnMatrix::N)
    .def_readonly("W", &DtnMatrix::W)
    .def_readonly("factors", &DtnMatrix::factors)
    .def_property_readonly("params",
                           [](const DtnMatrix &d) {
                             py::dict p;
                             for (const auto &[k, v] : d.params) p[py::str(k)] = v;
                             return p;
                           })
    .def_property_readonly("betas",
                           [](const DtnMatrix &d) {
                             std::vector<Complex> b;
                             for (const auto &md : d.modes) b.push_back(md.beta);
                             return b;
                           })
    .def_property_readonly("num_modes", &DtnMatrix::num_modes)
    .def_property_readonly("num_edge_dofs", &DtnMatrix::num_edge_dofs)
    .def("apply", &apply_dtn, py::arg("trace"))
    .def("truncation_indicator", &truncation_indicator, py::arg("fraction") = 0.6)
    .def("serialize", &serialize_dtn, py::arg("dense") = true)
    .def("export", [](const DtnMatrix &d, const std::string &path, bool dense) { export_dtn(d, path, dense); },
         py::arg("path"), py::arg("dense") = true);

  m.def("import_dtn",
        [](const std::string &path, std::optional<std::string> fp) { return import_dtn(path, fp); },
        py::arg("path"), py::arg("expected_fingerprint") = py::none());
  m.def("parse_dtn", [](const std::string &text) { return parse_dtn(text); }, py::arg("text"));

  m.def(
    "rect_beta_sq",
    [](const std::string &kind, int mm, int n, double a, double b, double omega, double eps, double mu) {
      if (kind != "TE" && kind != "TM") throw Error(ErrorKind::Validation, "python", "kind must be 'TE' or 'TM'");
      return rect_beta(kind == "TE" ? RectKind::TE : RectKind::TM, mm, n, a, b, omega, eps, mu);
    },
    py::arg("kind"), py::arg("m"), py::arg("n"), py::arg("a"), py::arg("b"), py::arg("omega"), py::arg("eps") = 1.0,
    py::arg("mu") = 1.0);
  m.def(
    "rect_modes",
    [](double a, double b, double omega, double eps, double mu, int count) {
      const RectModeList l = rect_mode_list(a, b, omega, eps, mu, count);
      std::vector<std::pair<std::string, double>> out;
      for (const auto &md : l.modes) out.emplace_back(md.label(), md.beta_sq);
      return py::make_tuple(out, l.num_propagating);
    },
    py::arg("a"), py::arg("b"), py::arg("omega"), py::arg("eps") = 1.0, py::arg("mu") = 1.0, py::arg("count") = 10);

  m.def(
    "convergence",
    [](const Mesh &mesh, double omega, std::optional<MaterialMap> materials, int levels, int num_modes) {
      SolveOptions o;
      o.omega = omega;
      o.num_modes = num_modes;
      const MaterialMap mm = materials ? *materials : uniform_materials(mesh, 1.0, 1.0);
      const ConvergenceTable t = convergence_study(mesh, mm, o, levels);
      py::list rows;
      for (const auto &r : t.rows)
      {
        py::dict d;
        d["level"] = r.level;
        d["h"] = r.h;
        d["dofs"] = r.dofs;
        d["beta_sq"] = r.beta_sq;
        d["error"] = r.error;
        d["order"] = r.order;
        rows.append(d);
      }
      std::vector<std::string> labels;
      for (const auto &rm : t.reference) labels.push_back(rm.label());
      return py::make_tuple(labels, rows);
    },
    py::arg("mesh"), py::arg("omega"), py::arg("materials") = py::none(), py::arg("levels") = 3,
    py::arg("num_modes") = 6);
}
