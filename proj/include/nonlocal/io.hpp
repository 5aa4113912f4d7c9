#pragma once

// CSV emission (17 significant digits, round-trip exact doubles) and the
// versioned binary container for assembled forms. All binary floats are
// 64-bit little-endian; integer fields are fixed-width little-endian.

#include <cstdio>
#include <cstring>
#include <fstream>

#include "forms.hpp"

namespace nonlocal {

inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline std::string csv_quote(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

class CsvWriter {
  public:
    explicit CsvWriter(std::ostream& os) : os_(os) {}
    void row(const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) os_ << ',';
            os_ << csv_quote(cells[i]);
        }
        os_ << '\n';
    }
    void numeric_row(const std::vector<double>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) os_ << ',';
            os_ << format_double(cells[i]);
        }
        os_ << '\n';
    }

  private:
    std::ostream& os_;
};

// grid function CSV: cell index, center coordinates, value
inline void write_grid_function_csv(std::ostream& os, const GridFunction& u,
                                    bool include_shell = false) {
    CsvWriter w(os);
    const Domain& d = *u.dom;
    std::vector<std::string> header{"index"};
    header.push_back("x0");
    if (d.dim == 2) header.push_back("x1");
    header.push_back("value");
    w.row(header);
    for (std::size_t i = 0; i < d.n_interior(); ++i) {
        auto x = d.interior_center(i);
        std::vector<double> row{double(i), x[0]};
        if (d.dim == 2) row.push_back(x[1]);
        row.push_back(u.interior[i]);
        w.numeric_row(row);
    }
    if (include_shell)
        for (std::size_t i = 0; i < d.n_shell(); ++i) {
            auto x = d.shell_center(i);
            std::vector<double> row{double(d.n_interior() + i), x[0]};
            if (d.dim == 2) row.push_back(x[1]);
            row.push_back(u.shell[i]);
            w.numeric_row(row);
        }
}

// reads the value column back; row count must match the target layout
inline std::vector<double> read_value_csv(std::istream& is) {
    std::vector<double> out;
    std::string line;
    bool first = true;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        if (first) {
            first = false;
            if (line.find("index") != std::string::npos) continue;  // header
        }
        auto pos = line.find_last_of(',');
        out.push_back(std::stod(pos == std::string::npos ? line : line.substr(pos + 1)));
    }
    return out;
}

namespace io_detail {

template <typename T>
inline void put(std::ostream& os, T v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}
template <typename T>
inline T take(std::istream& is) {
    T v{};
    is.read(reinterpret_cast<char*>(&v), sizeof(T));
    return v;
}

}  // namespace io_detail

inline constexpr char kFormMagic[8] = {'N', 'L', 'F', 'O', 'R', 'M', '0', '1'};

inline void write_form(std::ostream& os, const FormMatrix& F) {
    using namespace io_detail;
    os.write(kFormMagic, 8);
    const Domain& d = *F.dom;
    put<uint32_t>(os, 1);  // version
    put<uint32_t>(os, uint32_t(d.dim));
    put<double>(os, d.h);
    put<double>(os, d.r_ext);
    put<double>(os, d.anchor[0]);
    put<double>(os, d.anchor[1]);
    put<uint64_t>(os, d.n_interior());
    put<uint64_t>(os, d.n_shell());
    put<uint64_t>(os, F.pairs.size());
    for (auto& c : d.interior) {
        put<int32_t>(os, c[0]);
        put<int32_t>(os, c[1]);
    }
    for (auto& c : d.shell) {
        put<int32_t>(os, c[0]);
        put<int32_t>(os, c[1]);
    }
    for (double v : F.lambda) put<double>(os, v);
    for (double v : F.tau) put<double>(os, v);
    for (auto& p : F.pairs) {
        put<uint32_t>(os, p.i);
        put<uint32_t>(os, p.j);
        put<double>(os, p.w);
    }
}

// The caller owns the Domain; the form points into it.
struct LoadedForm {
    std::shared_ptr<Domain> domain;
    FormMatrix form;
};

inline LoadedForm read_form(std::istream& is, const KernelSpec& kernel) {
    using namespace io_detail;
    char magic[8];
    is.read(magic, 8);
    if (!is || std::memcmp(magic, kFormMagic, 8) != 0)
        throw std::runtime_error("not a form container (bad magic)");
    uint32_t version = take<uint32_t>(is);
    if (version != 1) throw std::runtime_error("unsupported form container version");
    LoadedForm out;
    auto d = std::make_shared<Domain>();
    d->dim = int(take<uint32_t>(is));
    d->h = take<double>(is);
    d->r_ext = take<double>(is);
    d->anchor[0] = take<double>(is);
    d->anchor[1] = take<double>(is);
    uint64_t n_int = take<uint64_t>(is);
    uint64_t n_shell = take<uint64_t>(is);
    uint64_t n_pairs = take<uint64_t>(is);
    d->interior.resize(n_int);
    d->shell.resize(n_shell);
    for (auto& c : d->interior) {
        c[0] = take<int32_t>(is);
        c[1] = take<int32_t>(is);
    }
    for (auto& c : d->shell) {
        c[0] = take<int32_t>(is);
        c[1] = take<int32_t>(is);
    }
    d->shape = ShapeSpec::cell_union(d->interior, d->dim);
    out.domain = d;
    out.form.dom = d.get();
    out.form.kernel = kernel;
    out.form.lambda.resize(n_int);
    out.form.tau.resize(n_int);
    for (auto& v : out.form.lambda) v = take<double>(is);
    for (auto& v : out.form.tau) v = take<double>(is);
    out.form.pairs.resize(n_pairs);
    for (auto& p : out.form.pairs) {
        p.i = take<uint32_t>(is);
        p.j = take<uint32_t>(is);
        p.w = take<double>(is);
    }
    if (!is) throw std::runtime_error("truncated form container");
    return out;
}

}  // namespace nonlocal
