#pragma once

#include "magswim/numerics.hpp"

#include <filesystem>
#include <string>
#include <string_view>

namespace magswim {

/// Sign conventions for the singular vectors. Paper tables use a fixed sign for c01 and,
/// for a few magnetisations, a left-handed (beta0, beta1, beta2) triad.
struct Convention {
    int c01_sign = +1;
    bool right_handed = true;
};

/// Nondimensional mobility blocks plus the unit magnetic moment, all in the body frame.
struct Swimmer {
    std::string name;
    Mat3 M11 = Mat3::Zero();  // 1/(eta l); unused by the dynamics, optional in input
    Mat3 M12 = Mat3::Zero();  // 1/(eta l^2)
    Mat3 M22 = Mat3::Identity();  // 1/(eta l^3)
    Vec3 m = Vec3::UnitZ();
    bool has_M11 = false;
    double length_scale = 1.0;   // documentation only
    std::string length_unit = "l";
    std::string time_scale = "t_c = eta l^3/(m B)";  // documentation only
    Convention convention;
    std::string source_hash;  // FNV-1a of the source document, hex
};

/// SVD data of P = M22 [m]x with the chart coefficients.
struct PDecomposition {
    Mat3 P;
    double sigma1 = 0.0, sigma2 = 0.0, sigma0 = 0.0;
    Vec3 beta0, beta1, beta2;
    Vec3 eta0, eta1, eta2;
    double c01 = 0.0, c02 = 0.0, c11 = 0.0, c12 = 0.0;
    double theta0 = 0.0;
    bool degenerate = false;  // sigma1 ~ sigma2: theta0-dependent outputs disabled

    // Carried along for downstream modules.
    Mat3 M12, M22;
    Vec3 m;
    Mat3 Ch;  // M12 M22^-1
};

struct ChiralityData {
    Mat3 Ch;
    double ch_abs = 0.0;  // |(M12)_13 ((M22)_11^-1 + (M22)_33^-1)/2|
    double f_perp = 0.0;  // 2/((M22)_11^-1 + (M22)_22^-1)
};

/// Parse a swimmer definition (JSON text). Drag input is inverted and symmetrized.
Swimmer load_swimmer(std::string_view document);
Swimmer load_swimmer_file(const std::filesystem::path& path);

/// Validate and normalise hand-built data; throws std::invalid_argument on bad input.
Swimmer make_swimmer(std::string name, const Mat3& M11, const Mat3& M12, const Mat3& M22, const Vec3& m,
                     Convention conv = {});

/// M = (D^-1 + D^-T)/2 for the 6x6 drag matrix with blocks D11, D12, D12^T, D22.
void mobility_from_drag(const Mat3& D11, const Mat3& D12, const Mat3& D22, Mat3& M11, Mat3& M12, Mat3& M22);

PDecomposition decompose(const Swimmer& s);
ChiralityData chirality(const Swimmer& s);

/// Same swimmer with a different magnetisation (convention reset to defaults unless given).
Swimmer with_magnetisation(const Swimmer& s, const Vec3& m, Convention conv = {});

std::string fnv1a_hex(std::string_view bytes);

}  // namespace magswim
