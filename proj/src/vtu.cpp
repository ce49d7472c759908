// SPDX-License-Identifier: Apache-2.0
#include "hexhp/vtu.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "hexhp/assembly.hpp"
#include "hexhp/conformity.hpp"
#include "hexhp/error.hpp"
#include "hexhp/geometry.hpp"

namespace hexhp {

namespace fs = std::filesystem;

SampleLattice upscale_samples(int vlevel) {
  if (vlevel < 0 || vlevel > kMaxVlevel)
    fail(ErrorCode::Config, "VLEVEL must lie in 0.." + std::to_string(kMaxVlevel));
  const int m = 1 << vlevel, n = m + 1;
  SampleLattice s;
  s.points.reserve(static_cast<size_t>(n) * n * n);
  for (int k = 0; k < n; ++k)
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) s.points.emplace_back(double(i) / m, double(j) / m, double(k) / m);
  auto id = [n](int i, int j, int k) { return (k * n + j) * n + i; };
  for (int k = 0; k < m; ++k)
    for (int j = 0; j < m; ++j)
      for (int i = 0; i < m; ++i)
        s.cells.push_back({id(i, j, k), id(i + 1, j, k), id(i + 1, j + 1, k), id(i, j + 1, k),
                           id(i, j, k + 1), id(i + 1, j, k + 1), id(i + 1, j + 1, k + 1),
                           id(i, j + 1, k + 1)});
  return s;
}

namespace {

bool is_vector(Space s) { return s == Space::HCurl || s == Space::HDiv; }

std::vector<double> eval_with(const ModifiedElement& me, const Eigen::VectorXd& c,
                              const PhysicsAttr& pa, const VertexCoords& xnod, const Vec3& xi) {
  ShapeSet sh;
  shape_functions(pa.space, xi, me.order, sh);
  GeometryData gd = element_geometry(xnod, xi);
  const int nf = static_cast<int>(c.size()) / pa.ncomp;  // trace attributes stop before the middle
  const int w = is_vector(pa.space) ? 3 : 1;
  std::vector<double> out(static_cast<size_t>(pa.ncomp) * w, 0.0);
  for (int k = 0; k < nf; ++k) {
    for (int comp = 0; comp < pa.ncomp; ++comp) {
      const double ck = c[k * pa.ncomp + comp];
      switch (pa.space) {
        case Space::H1: out[comp] += ck * sh.value[k]; break;
        case Space::L2: out[comp] += ck * piola_l2_value(sh.value[k], gd); break;
        case Space::HCurl: {
          Vec3 v = piola_hcurl_value(sh.vec[k], gd);
          for (int d = 0; d < 3; ++d) out[3 * comp + d] += ck * v[d];
          break;
        }
        case Space::HDiv: {
          Vec3 v = piola_hdiv_value(sh.vec[k], gd);
          for (int d = 0; d < 3; ++d) out[3 * comp + d] += ck * v[d];
          break;
        }
      }
    }
  }
  return out;
}

bool selected(const ParaviewConfig& cfg, int a, int comp) {
  if (!cfg.attr_mask.empty() && (a >= static_cast<int>(cfg.attr_mask.size()) || !cfg.attr_mask[a]))
    return false;
  if (!cfg.comp_mask.empty() && a < static_cast<int>(cfg.comp_mask.size()) &&
      !cfg.comp_mask[a].empty())
    return comp < static_cast<int>(cfg.comp_mask[a].size()) && cfg.comp_mask[a][comp];
  return true;
}

void put(std::ostream& out, double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  out << buf;
}

}  // namespace

std::vector<double> evaluate_attribute(const Mesh& mesh, int mdle, int a, const Vec3& xi) {
  const auto& ph = mesh.physics();
  if (a < 0 || a >= ph.nr_physa()) fail(ErrorCode::Contract, "evaluate_attribute: bad attribute");
  ModifiedElement me = modified_element(mesh, mdle);
  Eigen::VectorXd c = gather_solution(mesh, mdle, a);
  return eval_with(me, c, ph.attrs[a], mesh.element_vertices(mdle), xi);
}

std::string export_vtu(const Mesh& mesh, const ParaviewConfig& cfg, const std::string& basename) {
  if (!fs::is_directory(cfg.dir))
    fail(ErrorCode::Io, "output directory '" + cfg.dir + "' does not exist");
  const SampleLattice lat = upscale_samples(cfg.vlevel);
  const auto& ph = mesh.physics();
  const std::vector<int>& elems = mesh.elem_order();
  const int ne = static_cast<int>(elems.size());
  const int np = static_cast<int>(lat.points.size());

  struct Field {
    std::string name;
    int a, comp, width;
  };
  std::vector<Field> fields;
  if (cfg.dump_attr) {
    if (!mesh.solved()) fail(ErrorCode::State, "export_vtu: mesh has no current solution");
    for (int a = 0; a < ph.nr_physa(); ++a) {
      if (!ph.attrs[a].enabled) continue;
      for (int c = 0; c < ph.attrs[a].ncomp; ++c)
        if (selected(cfg, a, c))
          fields.push_back({ph.attrs[a].nickname + "_" + std::to_string(c + 1), a, c,
                            is_vector(ph.attrs[a].space) ? 3 : 1});
    }
  }

  // Per element: coordinates then each field's values at all lattice points.
  std::vector<std::vector<Vec3>> xs(ne);
  std::vector<std::vector<std::vector<double>>> vals(ne);
  parallel_for(ne, 0, [&](int ie) {
    const int mdle = elems[ie];
    const VertexCoords xnod = mesh.element_vertices(mdle);
    xs[ie].resize(np);
    for (int p = 0; p < np; ++p) xs[ie][p] = trilinear_map(xnod, lat.points[p]);
    if (fields.empty()) return;
    ModifiedElement me = modified_element(mesh, mdle);
    std::vector<Eigen::VectorXd> coef(ph.nr_physa());
    for (const auto& f : fields)
      if (coef[f.a].size() == 0) coef[f.a] = local_values(mesh, me, f.a);
    vals[ie].assign(fields.size(), {});
    for (int p = 0; p < np; ++p) {
      std::vector<std::vector<double>> at(ph.nr_physa());
      for (size_t fi = 0; fi < fields.size(); ++fi) {
        const auto& f = fields[fi];
        if (at[f.a].empty()) at[f.a] = eval_with(me, coef[f.a], ph.attrs[f.a], xnod, lat.points[p]);
        for (int d = 0; d < f.width; ++d) vals[ie][fi].push_back(at[f.a][f.comp * f.width + d]);
      }
    }
  });

  const std::string path = (fs::path(cfg.dir) / (basename + ".vtu")).string();
  std::ofstream out(path);
  if (!out) fail(ErrorCode::Io, "cannot open '" + path + "' for writing");
  const long long npts = static_cast<long long>(ne) * np;
  const long long ncells = static_cast<long long>(ne) * static_cast<long long>(lat.cells.size());
  out << "<?xml version=\"1.0\"?>\n"
      << "<VTKFile type=\"UnstructuredGrid\" version=\"1.0\" byte_order=\"LittleEndian\" "
         "header_type=\"UInt64\">\n"
      << "<UnstructuredGrid>\n"
      << "<Piece NumberOfPoints=\"" << npts << "\" NumberOfCells=\"" << ncells << "\">\n";
  out << "<PointData>\n";
  for (size_t fi = 0; fi < fields.size(); ++fi) {
    out << "<DataArray type=\"Float64\" Name=\"" << fields[fi].name << "\" NumberOfComponents=\""
        << fields[fi].width << "\" format=\"ascii\">\n";
    for (int ie = 0; ie < ne; ++ie)
      for (double v : vals[ie][fi]) {
        put(out, v);
        out << '\n';
      }
    out << "</DataArray>\n";
  }
  out << "</PointData>\n<Points>\n"
      << "<DataArray type=\"Float64\" NumberOfComponents=\"3\" format=\"ascii\">\n";
  for (int ie = 0; ie < ne; ++ie)
    for (const Vec3& x : xs[ie]) {
      put(out, x[0]);
      out << ' ';
      put(out, x[1]);
      out << ' ';
      put(out, x[2]);
      out << '\n';
    }
  out << "</DataArray>\n</Points>\n<Cells>\n"
      << "<DataArray type=\"Int64\" Name=\"connectivity\" format=\"ascii\">\n";
  for (int ie = 0; ie < ne; ++ie)
    for (const auto& c : lat.cells) {
      for (int k = 0; k < 8; ++k) out << (k ? " " : "") << static_cast<long long>(ie) * np + c[k];
      out << '\n';
    }
  out << "</DataArray>\n<DataArray type=\"Int64\" Name=\"offsets\" format=\"ascii\">\n";
  for (long long c = 1; c <= ncells; ++c) out << 8 * c << '\n';
  out << "</DataArray>\n<DataArray type=\"UInt8\" Name=\"types\" format=\"ascii\">\n";
  for (long long c = 0; c < ncells; ++c) out << "12\n";
  out << "</DataArray>\n</Cells>\n</Piece>\n</UnstructuredGrid>\n</VTKFile>\n";
  if (!out) fail(ErrorCode::Io, "write failure on '" + path + "'");
  return path;
}

PvdSeries::PvdSeries(std::string dir, std::string basename)
    : dir_(std::move(dir)), basename_(std::move(basename)) {}

void PvdSeries::add(double time, const std::string& vtu_file) {
  entries_.emplace_back(time, fs::path(vtu_file).filename().string());
}

std::string PvdSeries::write() const {
  if (!fs::is_directory(dir_)) fail(ErrorCode::Io, "output directory '" + dir_ + "' does not exist");
  const std::string path = (fs::path(dir_) / (basename_ + ".pvd")).string();
  std::ofstream out(path);
  if (!out) fail(ErrorCode::Io, "cannot open '" + path + "' for writing");
  out << "<?xml version=\"1.0\"?>\n"
      << "<VTKFile type=\"Collection\" version=\"0.1\" byte_order=\"LittleEndian\">\n"
      << "<Collection>\n";
  for (const auto& [t, f] : entries_) {
    out << "<DataSet timestep=\"";
    put(out, t);
    out << "\" group=\"\" part=\"0\" file=\"" << f << "\"/>\n";
  }
  out << "</Collection>\n</VTKFile>\n";
  if (!out) fail(ErrorCode::Io, "write failure on '" + path + "'");
  return path;
}

}  // namespace hexhp
