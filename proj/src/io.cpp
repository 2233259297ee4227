#include "ppr/io.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>

namespace ppr::io {

namespace {

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& tok, std::size_t line) {
  std::size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(tok, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos != tok.size() || tok.empty()) {
    throw std::runtime_error("matrix CSV line " + std::to_string(line) + ": bad number '" + tok + "'");
  }
  return v;
}

std::ifstream open_in(const std::filesystem::path& path, std::ios::openmode mode = std::ios::in) {
  std::ifstream in(path, mode);
  if (!in) throw std::runtime_error("cannot open '" + path.string() + "'");
  return in;
}

}  // namespace

CMat read_matrix_csv(std::istream& in) {
  std::string line;
  std::size_t lineno = 1;
  if (!std::getline(in, line)) throw std::runtime_error("matrix CSV: missing header");
  const auto comma = line.find(',');
  if (comma == std::string::npos) throw std::runtime_error("matrix CSV: header must be 'M,N'");
  const auto m = static_cast<Index>(parse_double(trim(line.substr(0, comma)), lineno));
  const auto n = static_cast<Index>(parse_double(trim(line.substr(comma + 1)), lineno));
  if (m < 1 || n < 1) throw std::runtime_error("matrix CSV: M and N must be positive");

  CMat a(m, n);
  for (Index i = 0; i < m; ++i) {
    ++lineno;
    if (!std::getline(in, line)) {
      throw std::runtime_error("matrix CSV: expected " + std::to_string(m) + " rows, got " +
                               std::to_string(i));
    }
    std::stringstream ss(line);
    std::string cell;
    Index j = 0;
    while (std::getline(ss, cell, ',')) {
      cell = trim(cell);
      const auto colon = cell.find(':');
      if (colon == std::string::npos) {
        throw std::runtime_error("matrix CSV line " + std::to_string(lineno) +
                                 ": entry '" + cell + "' is not re:im");
      }
      if (j >= n) {
        throw std::runtime_error("matrix CSV line " + std::to_string(lineno) + ": too many entries");
      }
      a(i, j++) = Complex(parse_double(trim(cell.substr(0, colon)), lineno),
                          parse_double(trim(cell.substr(colon + 1)), lineno));
    }
    if (j != n) {
      throw std::runtime_error("matrix CSV line " + std::to_string(lineno) + ": expected " +
                               std::to_string(n) + " entries, got " + std::to_string(j));
    }
  }
  return a;
}

CMat read_matrix_csv(const std::filesystem::path& path) {
  auto in = open_in(path);
  return read_matrix_csv(in);
}

void write_matrix_csv(std::ostream& out, const CMat& a) {
  out << a.rows() << ',' << a.cols() << '\n';
  out.precision(17);
  for (Index i = 0; i < a.rows(); ++i) {
    for (Index j = 0; j < a.cols(); ++j) {
      if (j) out << ',';
      out << a(i, j).real() << ':' << a(i, j).imag();
    }
    out << '\n';
  }
}

ForwardModel load_file_model(const std::filesystem::path& path, double background) {
  CMat a = read_matrix_csv(path);
  const Index m = a.rows();
  return make_dense_model(std::move(a), RVec::Constant(m, background), ModelKind::FileMatrix);
}

namespace {

// Next header token, skipping whitespace and '#' comments.
std::string pgm_token(std::istream& in) {
  std::string tok;
  int c;
  while ((c = in.get()) != EOF) {
    if (c == '#') {
      while ((c = in.get()) != EOF && c != '\n') {
      }
      continue;
    }
    if (std::isspace(c)) {
      if (!tok.empty()) break;
      continue;
    }
    tok.push_back(static_cast<char>(c));
  }
  return tok;
}

}  // namespace

RMat read_pgm(std::istream& in) {
  const std::string magic = pgm_token(in);
  if (magic != "P2" && magic != "P5") throw std::runtime_error("PGM: unsupported magic '" + magic + "'");
  const int width = std::stoi(pgm_token(in));
  const int height = std::stoi(pgm_token(in));
  const int maxval = std::stoi(pgm_token(in));
  if (width < 1 || height < 1 || maxval < 1 || maxval > 65535) {
    throw std::runtime_error("PGM: bad header");
  }
  RMat img(height, width);
  if (magic == "P2") {
    for (int r = 0; r < height; ++r)
      for (int c = 0; c < width; ++c) {
        const std::string tok = pgm_token(in);
        if (tok.empty()) throw std::runtime_error("PGM: truncated pixel data");
        img(r, c) = std::stod(tok) / maxval;
      }
  } else {
    const int bytes = maxval < 256 ? 1 : 2;
    for (int r = 0; r < height; ++r)
      for (int c = 0; c < width; ++c) {
        int v = in.get();
        if (bytes == 2) v = (v << 8) | in.get();
        if (!in) throw std::runtime_error("PGM: truncated pixel data");
        img(r, c) = static_cast<double>(v) / maxval;
      }
  }
  return img;
}

RMat read_pgm(const std::filesystem::path& path) {
  auto in = open_in(path, std::ios::in | std::ios::binary);
  return read_pgm(in);
}

void write_pgm(const std::filesystem::path& path, const RMat& image) {
  std::ofstream out(path, std::ios::out | std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << "P5\n" << image.cols() << ' ' << image.rows() << "\n255\n";
  for (Index r = 0; r < image.rows(); ++r)
    for (Index c = 0; c < image.cols(); ++c) {
      const double v = std::clamp(image(r, c), 0.0, 1.0);
      out.put(static_cast<char>(static_cast<unsigned char>(std::lround(v * 255.0))));
    }
}

}  // namespace ppr::io
