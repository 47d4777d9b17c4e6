#include "magswim/swimmer.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace magswim {
namespace {

using json = nlohmann::json;

Mat3 read_mat3(const json& j, const char* key)
{
    if (!j.contains(key)) throw std::invalid_argument(std::string("swimmer: missing block ") + key);
    const json& a = j.at(key);
    if (!a.is_array() || a.size() != 3) throw std::invalid_argument(std::string("swimmer: ") + key + " must be 3x3");
    Mat3 M;
    for (int r = 0; r < 3; ++r) {
        if (!a[r].is_array() || a[r].size() != 3)
            throw std::invalid_argument(std::string("swimmer: ") + key + " must be 3x3");
        for (int c = 0; c < 3; ++c) M(r, c) = a[r][c].get<double>();
    }
    if (!M.allFinite()) throw std::invalid_argument(std::string("swimmer: non-finite entry in ") + key);
    return M;
}

}  // namespace

std::string fnv1a_hex(std::string_view bytes)
{
    std::uint64_t h = 14695981039346656037ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    std::ostringstream os;
    os << std::hex << std::setw(16) << std::setfill('0') << h;
    return os.str();
}

void mobility_from_drag(const Mat3& D11, const Mat3& D12, const Mat3& D22, Mat3& M11, Mat3& M12, Mat3& M22)
{
    Eigen::Matrix<double, 6, 6> D;
    D << D11, D12, D12.transpose(), D22;
    const Eigen::Matrix<double, 6, 6> Di = D.inverse();
    if (!Di.allFinite()) throw std::invalid_argument("swimmer: singular drag matrix");
    const Eigen::Matrix<double, 6, 6> M = 0.5 * Di + 0.5 * Di.transpose();
    M11 = M.topLeftCorner<3, 3>();
    M12 = M.topRightCorner<3, 3>();
    M22 = M.bottomRightCorner<3, 3>();
}

Swimmer make_swimmer(std::string name, const Mat3& M11, const Mat3& M12, const Mat3& M22, const Vec3& m,
                     Convention conv)
{
    if (!M11.allFinite() || !M12.allFinite() || !M22.allFinite() || !m.allFinite())
        throw std::invalid_argument("swimmer: non-finite data");
    const double mn = m.norm();
    if (!(mn > 0.0)) throw std::invalid_argument("swimmer: |m| = 0");
    if (conv.c01_sign != 1 && conv.c01_sign != -1) throw std::invalid_argument("swimmer: c01_sign must be +1 or -1");

    Swimmer s;
    s.name = std::move(name);
    s.M11 = 0.5 * (M11 + M11.transpose());
    s.M12 = M12;
    s.M22 = 0.5 * (M22 + M22.transpose());
    s.m = m / mn;
    s.convention = conv;

    Eigen::SelfAdjointEigenSolver<Mat3> es(s.M22, Eigen::EigenvaluesOnly);
    if (!(es.eigenvalues().minCoeff() > 0.0)) throw std::invalid_argument("swimmer: M22 is not positive definite");
    return s;
}

Swimmer with_magnetisation(const Swimmer& s, const Vec3& m, Convention conv)
{
    Swimmer out = make_swimmer(s.name, s.M11, s.M12, s.M22, m, conv);
    out.has_M11 = s.has_M11;
    out.length_scale = s.length_scale;
    out.length_unit = s.length_unit;
    out.time_scale = s.time_scale;
    out.source_hash = s.source_hash;
    return out;
}

Swimmer load_swimmer(std::string_view document)
{
    json j;
    try {
        j = json::parse(document);
    } catch (const json::parse_error& e) {
        throw std::invalid_argument(std::string("swimmer: malformed JSON: ") + e.what());
    }
    if (!j.is_object()) throw std::invalid_argument("swimmer: document must be a JSON object");
    if (!j.contains("m")) throw std::invalid_argument("swimmer: missing m");
    const json& jm = j.at("m");
    if (!jm.is_array() || jm.size() != 3) throw std::invalid_argument("swimmer: m must have 3 components");
    const Vec3 m(jm[0].get<double>(), jm[1].get<double>(), jm[2].get<double>());

    Mat3 M11 = Mat3::Zero(), M12, M22;
    bool has_M11 = true;
    if (j.contains("drag")) {
        const json& d = j.at("drag");
        mobility_from_drag(read_mat3(d, "D11"), read_mat3(d, "D12"), read_mat3(d, "D22"), M11, M12, M22);
    } else if (j.contains("mobility")) {
        const json& d = j.at("mobility");
        M12 = read_mat3(d, "M12");
        M22 = read_mat3(d, "M22");
        if (d.contains("M11")) {
            M11 = read_mat3(d, "M11");
        } else {
            has_M11 = false;
        }
    } else {
        throw std::invalid_argument("swimmer: need either drag or mobility blocks");
    }

    Convention conv;
    if (j.contains("convention")) {
        const json& c = j.at("convention");
        conv.c01_sign = c.value("c01_sign", 1);
        const std::string hand = c.value("handedness", std::string("right"));
        if (hand != "right" && hand != "left") throw std::invalid_argument("swimmer: handedness must be right or left");
        conv.right_handed = hand == "right";
    }

    Swimmer s = make_swimmer(j.value("name", std::string("unnamed")), M11, M12, M22, m, conv);
    s.has_M11 = has_M11;
    if (j.contains("length_scale")) {
        const json& l = j.at("length_scale");
        if (l.is_number()) {
            s.length_scale = l.get<double>();
        } else if (l.is_object()) {
            s.length_scale = l.value("value", 1.0);
            s.length_unit = l.value("unit", std::string("l"));
        }
    }
    s.source_hash = fnv1a_hex(document);
    return s;
}

Swimmer load_swimmer_file(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::invalid_argument("swimmer: cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return load_swimmer(ss.str());
}

PDecomposition decompose(const Swimmer& s)
{
    PDecomposition d;
    d.M12 = s.M12;
    d.M22 = s.M22;
    d.m = s.m;
    d.Ch = s.M12 * s.M22.inverse();
    d.P = s.M22 * skew(s.m);

    const numerics::Svd3 sv = numerics::svd3(d.P);
    d.sigma1 = sv.singular_values(0);
    d.sigma2 = sv.singular_values(1);
    d.sigma0 = 0.0;

    d.beta0 = s.m;
    d.beta1 = sv.V.col(0);
    d.beta2 = sv.V.col(1);
    // Project out any residual m component left by rounding in the SVD.
    d.beta1 = (d.beta1 - d.beta1.dot(s.m) * s.m).normalized();
    d.beta2 = (d.beta2 - d.beta2.dot(s.m) * s.m - d.beta2.dot(d.beta1) * d.beta1).normalized();

    const double c01 = d.beta0.dot(d.P * d.beta1);
    if ((c01 < 0.0 ? -1 : 1) != s.convention.c01_sign) d.beta1 = -d.beta1;
    Mat3 tri;
    tri << d.beta0, d.beta1, d.beta2;
    const bool right = tri.determinant() > 0.0;
    if (right != s.convention.right_handed) d.beta2 = -d.beta2;

    d.eta0 = s.M22.ldlt().solve(s.m).normalized();
    d.eta1 = d.P * d.beta1 / d.sigma1;
    d.eta2 = d.P * d.beta2 / d.sigma2;

    d.c01 = d.beta0.dot(d.P * d.beta1);
    d.c02 = d.beta0.dot(d.P * d.beta2);
    d.c11 = d.beta1.dot(d.P * d.beta1);
    d.c12 = d.beta1.dot((d.P + d.P.transpose()) * d.beta2);

    d.degenerate = !(d.sigma1 > 0.0) || (d.sigma1 - d.sigma2) < 1e-8 * d.sigma1;
    if (d.degenerate) {
        d.theta0 = std::numeric_limits<double>::quiet_NaN();
    } else {
        const double num = -d.c01 * d.sigma2;
        const double den = d.c02 * d.sigma1;
        if (num == 0.0 && den == 0.0) {
            d.theta0 = std::numeric_limits<double>::quiet_NaN();
        } else if (std::abs(den) <= 1e-12 * std::abs(num)) {
            d.theta0 = std::numbers::pi / 2;
        } else {
            d.theta0 = std::atan(num / den);
        }
    }
    return d;
}

ChiralityData chirality(const Swimmer& s)
{
    const Eigen::FullPivLU<Mat3> lu(s.M22);
    if (!lu.isInvertible()) throw std::invalid_argument("chirality: singular M22");
    ChiralityData c;
    c.Ch = s.M12 * lu.inverse();
    c.ch_abs = std::abs(s.M12(0, 2) * (1.0 / s.M22(0, 0) + 1.0 / s.M22(2, 2)) / 2.0);
    c.f_perp = 2.0 / (1.0 / s.M22(0, 0) + 1.0 / s.M22(1, 1));
    return c;
}

}  // namespace magswim
