#pragma once

// Frozen high-precision reference values, computed independently with
// mpmath (40 significant digits) before the implementation was written.
namespace pcwlat::testing {

struct BesselRef {
  double x, j0, y0, k0;
};

inline constexpr BesselRef bessel_table[] = {
    {9.9999999999999995e-07, 0.99999999999974998, -8.8690314816594444, 13.931442073626419},
    {0.0001, 0.99999999750000002, -5.9372890697093368, 9.3262719134502756},
    {0.001, 0.99999975000001562, -4.4714166113759228, 7.0236888005623817},
    {0.01, 0.99997500015624952, -3.0054556370836458, 4.7212447301610947},
    {0.059039000000000001, 0.99912878893624424, -1.8729680249429701, 2.9489274983551206},
    {0.10000000000000001, 0.99750156206604002, -1.5342386513503667, 2.4270690247020164},
    {0.29520000000000002, 0.97833260800479727, -0.81836009579537961, 1.3872633922522495},
    {0.5, 0.93846980724081286, -0.44451873350670656, 0.92441907122766587},
    {1, 0.76519768655796661, 0.088256964215676956, 0.42102443824070834},
    {2, 0.22389077914123567, 0.51037567264974515, 0.11389387274953344},
    {2.4047999999999998, 1.3268284301171568e-05, 0.50992700926434342, 0.069816670486770163},
    {3, -0.26005195490193345, 0.37685001001279039, 0.034739504386279249},
    {5, -0.17759677131433829, -0.30851762524903376, 0.0036910983340425942},
    {8, 0.1716508071375539, 0.22352148938756622, 0.00014647070522281539},
    {10, -0.24593576445134835, 0.055671167283599395, 1.778006231616765e-05},
    {12.5, 0.1468840547004211, -0.17121430684466929, 1.3084036967769775e-06},
    {13, 0.20692610237706782, -0.078207864527875912, 7.7845438614204961e-07},
    {15, -0.014224472826780772, 0.20546429603891828, 9.8195364823964346e-08},
    {20, 0.16702466434058316, 0.062640596809383831, 5.7412378153365248e-10},
    {30, -0.086367983581040211, -0.11729573168666403, 2.1324774964630563e-14},
    {40, 0.0073668905842372897, 0.12593641705826092, 8.3928611000995672e-19},
    {50, 0.055812327669251816, -0.098064995470077077, 3.4101677497894956e-23},
};

// GaP slab, n = 3.25, W = 250 nm, lambda0 = 770 nm, fundamental symmetric TE
// branch (independent root find on u = R cos u with mpmath).
inline constexpr double slab_ref_kz = 9483883.689816685;     // rad/m
inline constexpr double slab_ref_beta = 23383279.759036418;  // rad/m
inline constexpr double slab_ref_kpar = 24766167.666360103;  // rad/m

}  // namespace pcwlat::testing
