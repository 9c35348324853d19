#include "minsurf/mesh_io.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

namespace minsurf {

namespace {

std::string lower_ext(const std::string& path) {
  auto dot = path.find_last_of('.');
  if (dot == std::string::npos) return "";
  std::string ext = path.substr(dot + 1);
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return ext;
}

void put_num(std::string& out, double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  out += buf;
}

[[noreturn]] void bad_line(const std::string& path, int line, const std::string& why) {
  throw DomainError(path + ":" + std::to_string(line) + ": " + why);
}

// The non-geometry fields, shared by both formats.
void append_extension_comments(std::string& out, const Triangulation& t) {
  for (int b = 0; b < t.n_boundary_facets(); ++b) {
    out += "# bfacet";
    for (int c = 0; c < t.k; ++c)
      out += " " + std::to_string(t.boundary_simplices(b, c) + 1);
    out += "\n";
  }
  for (int v : t.boundary_vertices) {
    out += "# bparam " + std::to_string(v + 1) + " " +
           std::to_string(t.bparam_component[v]) + " ";
    put_num(out, t.bparam_t[v]);
    out += "\n";
  }
  for (int s = 0; s < t.n_simplices(); ++s) {
    for (int c = 0; c <= t.k; ++c) {
      Eigen::RowVectorXd stored = t.corner_params[s].row(c);
      Eigen::RowVectorXd global = t.vertex_params.row(t.simplices(s, c));
      if (stored == global) continue;
      out += "# cparam " + std::to_string(s + 1) + " " + std::to_string(c + 1);
      for (int d = 0; d < t.k; ++d) {
        out += " ";
        put_num(out, stored(d));
      }
      out += "\n";
    }
  }
}

std::string header_comment(const Triangulation& t, int ambient) {
  std::string h = "# minsurf 1 k " + std::to_string(t.k) + " ambient " +
                  std::to_string(ambient) + " components " +
                  std::to_string(t.num_boundary_components) + " period ";
  put_num(h, t.chart_period_x);
  h += "\n";
  return h;
}

std::string to_obj(const Triangulation& t, const Eigen::MatrixXd& pos) {
  std::string out = header_comment(t, static_cast<int>(pos.cols()));
  for (int v = 0; v < t.n_vertices(); ++v) {
    out += "v";
    for (int d = 0; d < pos.cols(); ++d) {
      out += " ";
      put_num(out, pos(v, d));
    }
    for (int d = static_cast<int>(pos.cols()); d < 3; ++d) out += " 0";
    out += "\n";
  }
  for (int v = 0; v < t.n_vertices(); ++v) {
    out += "vt";
    for (int d = 0; d < t.k; ++d) {
      out += " ";
      put_num(out, t.vertex_params(v, d));
    }
    if (t.k == 1) out += " 0";
    out += "\n";
  }
  for (int s = 0; s < t.n_simplices(); ++s) {
    out += t.k == 1 ? "l" : "f";
    for (int c = 0; c <= t.k; ++c) {
      std::string id = std::to_string(t.simplices(s, c) + 1);
      out += " " + (t.k == 1 ? id : id + "/" + id);
    }
    out += "\n";
  }
  append_extension_comments(out, t);
  return out;
}

std::string to_off(const Triangulation& t, const Eigen::MatrixXd& pos) {
  std::string out = "OFF\n";
  out += header_comment(t, static_cast<int>(pos.cols()));
  out += std::to_string(t.n_vertices()) + " " + std::to_string(t.n_simplices()) + " 0\n";
  for (int v = 0; v < t.n_vertices(); ++v) {
    for (int d = 0; d < pos.cols(); ++d) {
      if (d) out += " ";
      put_num(out, pos(v, d));
    }
    for (int d = static_cast<int>(pos.cols()); d < 3; ++d) out += " 0";
    out += "\n";
  }
  for (int s = 0; s < t.n_simplices(); ++s) {
    out += std::to_string(t.k + 1);
    for (int c = 0; c <= t.k; ++c) out += " " + std::to_string(t.simplices(s, c));
    out += "\n";
  }
  // OFF has no texture slot, so the chart goes into comments too.
  for (int v = 0; v < t.n_vertices(); ++v) {
    out += "# vparam " + std::to_string(v + 1);
    for (int d = 0; d < t.k; ++d) {
      out += " ";
      put_num(out, t.vertex_params(v, d));
    }
    out += "\n";
  }
  append_extension_comments(out, t);
  return out;
}

struct RawMesh {
  int k = -1, ambient = -1, components = -1;
  double period = 0;
  std::vector<std::array<double, 3>> positions;
  std::vector<std::array<double, 2>> params;  // from vt or # vparam
  std::vector<std::vector<int>> cells;        // 0-based
  std::vector<std::vector<int>> bfacets;      // 0-based
  struct BParam {
    int vid, component;
    double t;
  };
  std::vector<BParam> bparams;
  struct CParam {
    int sid, corner;
    double x[2];
  };
  std::vector<CParam> cparams;
};

int parse_face_token(const std::string& tok, const std::string& path, int line) {
  try {
    return std::stoi(tok.substr(0, tok.find('/')));
  } catch (const std::exception&) {
    bad_line(path, line, "bad face vertex '" + tok + "'");
  }
}

void parse_minsurf_header(std::istringstream& ss, RawMesh* raw) {
  std::string key;
  std::string version;
  ss >> version;
  while (ss >> key) {
    if (key == "k")
      ss >> raw->k;
    else if (key == "ambient")
      ss >> raw->ambient;
    else if (key == "components")
      ss >> raw->components;
    else if (key == "period")
      ss >> raw->period;
    else
      break;
  }
}

// Comment lines carrying data; returns false for ordinary comments.
bool parse_comment(const std::string& body, RawMesh* raw, const std::string& path,
                   int line) {
  std::istringstream ss(body);
  std::string tag;
  ss >> tag;
  if (tag == "minsurf") {
    parse_minsurf_header(ss, raw);
  } else if (tag == "bparam") {
    RawMesh::BParam p;
    if (!(ss >> p.vid >> p.component >> p.t)) bad_line(path, line, "bad bparam");
    --p.vid;
    raw->bparams.push_back(p);
  } else if (tag == "bfacet") {
    std::vector<int> f;
    int v;
    while (ss >> v) f.push_back(v - 1);
    if (f.empty()) bad_line(path, line, "empty bfacet");
    raw->bfacets.push_back(f);
  } else if (tag == "cparam") {
    RawMesh::CParam c{};
    if (!(ss >> c.sid >> c.corner >> c.x[0])) bad_line(path, line, "bad cparam");
    ss >> c.x[1];
    --c.sid;
    --c.corner;
    raw->cparams.push_back(c);
  } else if (tag == "vparam") {
    int vid;
    std::array<double, 2> p{0, 0};
    if (!(ss >> vid >> p[0])) bad_line(path, line, "bad vparam");
    ss >> p[1];
    if (vid - 1 != static_cast<int>(raw->params.size()))
      bad_line(path, line, "vparam lines out of order");
    raw->params.push_back(p);
  } else {
    return false;
  }
  return true;
}

RawMesh parse_obj(std::istream& in, const std::string& path) {
  RawMesh raw;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    if (line[0] == '#') {
      parse_comment(line.substr(1), &raw, path, lineno);
      continue;
    }
    std::istringstream ss(line);
    std::string tag;
    ss >> tag;
    if (tag == "v") {
      std::array<double, 3> p{0, 0, 0};
      if (!(ss >> p[0] >> p[1])) bad_line(path, lineno, "bad vertex");
      ss >> p[2];
      raw.positions.push_back(p);
    } else if (tag == "vt") {
      std::array<double, 2> p{0, 0};
      if (!(ss >> p[0])) bad_line(path, lineno, "bad texture vertex");
      ss >> p[1];
      raw.params.push_back(p);
    } else if (tag == "f" || tag == "l") {
      std::vector<int> cell;
      std::string tok;
      while (ss >> tok) cell.push_back(parse_face_token(tok, path, lineno) - 1);
      if (cell.size() < 2) bad_line(path, lineno, "face with fewer than 2 vertices");
      raw.cells.push_back(cell);
    }
    // Anything else (vn, s, o, g, usemtl...) is ignored.
  }
  return raw;
}

RawMesh parse_off(std::istream& in, const std::string& path) {
  RawMesh raw;
  std::string line;
  int lineno = 0;
  int nv = -1, nf = -1;
  enum { kHeader, kCounts, kVerts, kFaces, kDone } state = kHeader;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    if (line[0] == '#') {
      parse_comment(line.substr(1), &raw, path, lineno);
      continue;
    }
    std::istringstream ss(line);
    if (state == kHeader) {
      std::string magic;
      ss >> magic;
      if (magic != "OFF") bad_line(path, lineno, "not an OFF file");
      state = kCounts;
    } else if (state == kCounts) {
      int ne;
      if (!(ss >> nv >> nf >> ne)) bad_line(path, lineno, "bad count line");
      state = nv > 0 ? kVerts : (nf > 0 ? kFaces : kDone);
    } else if (state == kVerts) {
      std::array<double, 3> p{0, 0, 0};
      if (!(ss >> p[0] >> p[1])) bad_line(path, lineno, "bad vertex");
      ss >> p[2];
      raw.positions.push_back(p);
      if (static_cast<int>(raw.positions.size()) == nv)
        state = nf > 0 ? kFaces : kDone;
    } else if (state == kFaces) {
      int count;
      if (!(ss >> count)) bad_line(path, lineno, "bad face");
      std::vector<int> cell(count);
      for (int& v : cell)
        if (!(ss >> v)) bad_line(path, lineno, "truncated face");
      raw.cells.push_back(cell);
      if (static_cast<int>(raw.cells.size()) == nf) state = kDone;
    }
  }
  if (state != kDone) throw DomainError(path + ": truncated OFF file");
  return raw;
}

MeshData assemble(const RawMesh& raw, const std::string& path) {
  const int nv = static_cast<int>(raw.positions.size());
  if (nv == 0) throw DomainError(path + ": no vertices");
  if (raw.cells.empty()) throw DomainError(path + ": no cells");
  const int k = raw.k > 0 ? raw.k : static_cast<int>(raw.cells[0].size()) - 1;
  if (k != 1 && k != 2) throw DomainError(path + ": unsupported dimension");
  if (static_cast<int>(raw.params.size()) != nv)
    throw DomainError(path + ": chart coordinates missing or mismatched");
  const int m = raw.ambient > 0 ? raw.ambient : 3;
  if (m < k || m > 3) throw DomainError(path + ": bad ambient dimension");

  MeshData out;
  Triangulation& t = out.mesh;
  t.k = k;
  t.chart_period_x = raw.period;
  t.vertex_params.resize(nv, k);
  out.positions.resize(nv, m);
  for (int v = 0; v < nv; ++v) {
    for (int d = 0; d < k; ++d) t.vertex_params(v, d) = raw.params[v][d];
    for (int d = 0; d < m; ++d) out.positions(v, d) = raw.positions[v][d];
  }

  t.simplices.resize(static_cast<int>(raw.cells.size()), k + 1);
  for (size_t s = 0; s < raw.cells.size(); ++s) {
    if (static_cast<int>(raw.cells[s].size()) != k + 1)
      throw DomainError(path + ": cell " + std::to_string(s + 1) + " is not a " +
                        std::to_string(k) + "-simplex");
    for (int c = 0; c <= k; ++c) {
      int v = raw.cells[s][c];
      if (v < 0 || v >= nv)
        throw DomainError(path + ": cell " + std::to_string(s + 1) +
                          " references missing vertex");
      t.simplices(static_cast<int>(s), c) = v;
    }
  }

  t.corner_params.resize(t.n_simplices());
  for (int s = 0; s < t.n_simplices(); ++s) {
    t.corner_params[s].resize(k + 1, k);
    for (int c = 0; c <= k; ++c)
      t.corner_params[s].row(c) = t.vertex_params.row(t.simplices(s, c));
  }
  for (const auto& cp : raw.cparams) {
    if (cp.sid < 0 || cp.sid >= t.n_simplices() || cp.corner < 0 || cp.corner > k)
      throw DomainError(path + ": cparam out of range");
    for (int d = 0; d < k; ++d) t.corner_params[cp.sid](cp.corner, d) = cp.x[d];
  }

  t.boundary_simplices.resize(static_cast<int>(raw.bfacets.size()), k);
  for (size_t b = 0; b < raw.bfacets.size(); ++b) {
    if (static_cast<int>(raw.bfacets[b].size()) != k)
      throw DomainError(path + ": bfacet " + std::to_string(b + 1) + " has wrong arity");
    for (int c = 0; c < k; ++c) {
      int v = raw.bfacets[b][c];
      if (v < 0 || v >= nv)
        throw DomainError(path + ": bfacet references missing vertex");
      t.boundary_simplices(static_cast<int>(b), c) = v;
    }
  }

  t.bparam_component.assign(nv, -1);
  t.bparam_t.assign(nv, 0.0);
  for (const auto& bp : raw.bparams) {
    if (bp.vid < 0 || bp.vid >= nv) throw DomainError(path + ": bparam out of range");
    t.bparam_component[bp.vid] = bp.component;
    t.bparam_t[bp.vid] = bp.t;
  }
  for (int v = 0; v < nv; ++v)
    if (t.bparam_component[v] >= 0) t.boundary_vertices.push_back(v);
  int max_comp = -1;
  for (int c : t.bparam_component) max_comp = std::max(max_comp, c);
  t.num_boundary_components = raw.components >= 0 ? raw.components : max_comp + 1;

  t.validate();
  return out;
}

}  // namespace

void write_mesh(const std::string& path, const Triangulation& t,
                const Eigen::MatrixXd& positions) {
  if (positions.rows() != t.n_vertices())
    throw DomainError("write_mesh: position count differs from vertex count");
  std::string ext = lower_ext(path);
  std::string body;
  if (ext == "obj")
    body = to_obj(t, positions);
  else if (ext == "off")
    body = to_off(t, positions);
  else
    throw DomainError("write_mesh: unknown extension '" + ext + "' (use .obj or .off)");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DomainError("write_mesh: cannot open " + path);
  out << body;
  if (!out.flush()) throw DomainError("write_mesh: write failed for " + path);
}

MeshData read_mesh(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DomainError("read_mesh: cannot open " + path);
  std::string ext = lower_ext(path);
  RawMesh raw;
  if (ext == "obj")
    raw = parse_obj(in, path);
  else if (ext == "off")
    raw = parse_off(in, path);
  else
    throw DomainError("read_mesh: unknown extension '" + ext + "' (use .obj or .off)");
  return assemble(raw, path);
}

}  // namespace minsurf
