#include "wgm/materials.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "wgm/error.hpp"

namespace wgm
{

namespace
{

void check_positive(double v, const std::string &what)
{
  if (!(v > 0.0) || !std::isfinite(v))
  {
    throw Error(ErrorKind::Validation, "materials", what + " must be finite and positive");
  }
}

std::string read_file(const std::string &path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in)
  {
    throw Error(ErrorKind::Io, "materials", "cannot open '" + path + "'");
  }
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

NodalField read_nodal_field(const std::string &path, std::size_t num_nodes)
{
  NodalField field;
  field.values.assign(num_nodes, std::numeric_limits<double>::quiet_NaN());
  std::istringstream in(read_file(path));
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line))
  {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos)
    {
      line.resize(hash);
    }
    std::istringstream ls(line);
    long id;
    double v;
    if (!(ls >> id))
    {
      continue;
    }
    if (!(ls >> v))
    {
      throw ParseError("materials", lineno, path + ": expected '<node_id> <value>'");
    }
    if (id < 0 || id >= static_cast<long>(num_nodes))
    {
      throw ParseError("materials", lineno, path + ": node id out of range");
    }
    check_positive(v, path + " value");
    field.values[id] = v;
  }
  return field;
}

bool covers(const Coefficient &c, const Mesh &mesh, const std::string &region)
{
  const auto *f = std::get_if<NodalField>(&c);
  if (!f)
  {
    return true;
  }
  if (f->values.size() != mesh.num_nodes())
  {
    return false;
  }
  for (const auto &tri : mesh.triangles())
  {
    if (tri.region != region)
    {
      continue;
    }
    for (int v : tri.v)
    {
      if (std::isnan(f->values[v]))
      {
        return false;
      }
    }
  }
  return true;
}

}  // namespace

void MaterialMap::set(const std::string &region, RegionMaterial material)
{
  for (const Coefficient *c : {&material.epsilon, &material.mu})
  {
    if (const auto *v = std::get_if<double>(c))
    {
      check_positive(*v, "region '" + region + "' coefficient");
    }
  }
  regions_[region] = std::move(material);
}

void MaterialMap::set_constant(const std::string &region, double epsilon, double mu)
{
  set(region, {epsilon, mu});
}

const RegionMaterial &MaterialMap::at(const std::string &region) const
{
  auto it = regions_.find(region);
  if (it == regions_.end())
  {
    throw Error(ErrorKind::Validation, "materials",
                "region tag '" + region + "' has no material entry");
  }
  return it->second;
}

void MaterialMap::check_against(const Mesh &mesh) const
{
  for (const auto &tri : mesh.triangles())
  {
    const auto &m = at(tri.region);
    if (!covers(m.epsilon, mesh, tri.region) || !covers(m.mu, mesh, tri.region))
    {
      throw Error(ErrorKind::Validation, "materials",
                  "nodal field for region '" + tri.region + "' does not cover all its nodes");
    }
  }
}

double MaterialMap::max_eps_mu(const Mesh &mesh) const
{
  auto value = [](const Coefficient &c, int node) {
    if (const auto *v = std::get_if<double>(&c))
    {
      return *v;
    }
    return std::get<NodalField>(c).values[node];
  };
  double best = 0.0;
  for (const auto &tri : mesh.triangles())
  {
    const auto &m = at(tri.region);
    for (int v : tri.v)
    {
      best = std::max(best, value(m.epsilon, v) * value(m.mu, v));
    }
  }
  return best;
}

MaterialMap uniform_materials(const Mesh &mesh, double epsilon, double mu)
{
  MaterialMap map;
  for (const auto &tri : mesh.triangles())
  {
    if (!map.contains(tri.region))
    {
      map.set_constant(tri.region, epsilon, mu);
    }
  }
  return map;
}

MaterialMap parse_materials(std::string_view text, const std::string &base_dir,
                            std::size_t num_nodes)
{
  MaterialMap map;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t lineno = 0;
  auto resolve = [&](const std::string &p) {
    std::filesystem::path path(p);
    return path.is_absolute() ? path.string() : (std::filesystem::path(base_dir) / path).string();
  };
  while (std::getline(in, line))
  {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos)
    {
      line.resize(hash);
    }
    std::istringstream ls(line);
    std::vector<std::string> tok;
    for (std::string t; ls >> t;)
    {
      tok.push_back(t);
    }
    if (tok.empty())
    {
      continue;
    }
    if (map.contains(tok[0]))
    {
      throw ParseError("materials", lineno, "duplicate region '" + tok[0] + "'");
    }
    if (tok.size() == 4 && tok[1] == "field")
    {
      RegionMaterial m;
      m.epsilon = read_nodal_field(resolve(tok[2]), num_nodes);
      m.mu = read_nodal_field(resolve(tok[3]), num_nodes);
      map.set(tok[0], std::move(m));
      continue;
    }
    if (tok.size() != 3)
    {
      throw ParseError("materials", lineno,
                       "expected '<region> <epsilon> <mu>' or '<region> field <eps> <mu>'");
    }
    double eps, mu;
    try
    {
      std::size_t n1 = 0, n2 = 0;
      eps = std::stod(tok[1], &n1);
      mu = std::stod(tok[2], &n2);
      if (n1 != tok[1].size() || n2 != tok[2].size())
      {
        throw std::invalid_argument("trailing characters");
      }
    }
    catch (const std::exception &)
    {
      throw ParseError("materials", lineno, "non-numeric material value");
    }
    try
    {
      map.set_constant(tok[0], eps, mu);
    }
    catch (const Error &e)
    {
      throw ParseError("materials", lineno, e.what());
    }
  }
  return map;
}

MaterialMap read_materials_file(const std::string &path, std::size_t num_nodes)
{
  auto dir = std::filesystem::path(path).parent_path().string();
  return parse_materials(read_file(path), dir, num_nodes);
}

}  // namespace wgm
