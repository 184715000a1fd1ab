#pragma once

// Reference values produced by tests/oracle/free_flow_oracle.py (numpy/scipy,
// no code shared with the library). Regenerate with that script.

namespace coexsim::oracle {

inline constexpr double kRangeLegacy = 70.550484;     // -65 dBm
inline constexpr double kRangePreamble = 493.741918;  // -98.8 dBm
inline constexpr double kMinInterfererAt200 = 214.322741;

struct BusyPoint {
  double lambda_tti, d_x, d_u, p_busy;
};
inline constexpr BusyPoint kBusy[] = {
    {0.001, 390.0, 200.0, 0.504430},
    {0.001, 55.0, 200.0, 0.073884},
};

struct PrpPoint {
  double threshold_dbm, d_u, lambda;
  double closed, p_busy, p_pr_busy, exact;
};
inline constexpr PrpPoint kPrp[] = {
    {-65.0, 100.0, 1.0, 0.845558, 0.115907, 0.859506, 0.794175},
    {-65.0, 200.0, 1.0, 0.672962, 0.094897, 0.681413, 0.581829},
    {-65.0, 300.0, 1.0, 0.527387, 0.077695, 0.534580, 0.418429},
    {-98.8, 100.0, 1.0, 0.977402, 0.620012, 1.000000, 0.963211},
    {-98.8, 200.0, 1.0, 0.956339, 0.597287, 1.000000, 0.927500},
    {-98.8, 300.0, 1.0, 0.767312, 0.558399, 0.808356, 0.725373},
    {-65.0, 200.0, 0.5, 0.825542, 0.057810, 0.833190, 0.765420},
    {-98.8, 200.0, 2.0, 0.966772, 0.814410, 1.000000, 0.942997},
};

}  // namespace coexsim::oracle
