#ifndef WGM_MATERIALS_HPP
#define WGM_MATERIALS_HPP

#include <map>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "wgm/mesh.hpp"

namespace wgm
{

// Per-node values of a graded coefficient, interpolated linearly inside each triangle.
struct NodalField
{
  std::vector<double> values;  // indexed by mesh node
};

using Coefficient = std::variant<double, NodalField>;

struct RegionMaterial
{
  Coefficient epsilon = 1.0;  // relative permittivity
  Coefficient mu = 1.0;       // relative permeability
};

// Material data keyed by region tag. All values are real and strictly positive.
class MaterialMap
{
public:
  MaterialMap() = default;

  void set(const std::string &region, RegionMaterial material);
  void set_constant(const std::string &region, double epsilon, double mu);

  bool contains(const std::string &region) const { return regions_.count(region) != 0; }
  const RegionMaterial &at(const std::string &region) const;
  const std::map<std::string, RegionMaterial> &regions() const { return regions_; }

  // Throws if a region of the mesh has no entry or a nodal field does not cover the nodes of
  // its region.
  void check_against(const Mesh &mesh) const;

  // Largest epsilon*mu over all regions (nodal fields: over all nodes of the region).
  double max_eps_mu(const Mesh &mesh) const;

private:
  std::map<std::string, RegionMaterial> regions_;
};

// Convenience: every region of the mesh gets the same constants.
MaterialMap uniform_materials(const Mesh &mesh, double epsilon, double mu);

// Material file: one entry per line, either
//   <region> <epsilon> <mu>
//   <region> field <epsilon_file> <mu_file>
// Field files hold '<node_id> <value>' pairs; relative paths resolve against base_dir.
MaterialMap parse_materials(std::string_view text, const std::string &base_dir,
                            std::size_t num_nodes);
MaterialMap read_materials_file(const std::string &path, std::size_t num_nodes);

}  // namespace wgm

#endif  // WGM_MATERIALS_HPP
