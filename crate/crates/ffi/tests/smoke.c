#include <math.h>
#include <stdio.h>
#include "apc_ffi.h"

int main(void) {
    double a[4] = {1.0, 0.0, 1.0, 1.0};
    double b[2] = {1.0, 2.0};
    double x_star[2] = {1.0, 1.0};
    ApcSystem *sys = NULL;
    if (apc_system_new(2, 2, a, b, x_star, 2, &sys) != APC_STATUS_OK) return 1;

    ApcParams p;
    if (apc_optimal_params(sys, APC_METHOD_APC, &p) != APC_STATUS_OK) return 2;
    if (fabs(p.rho - (sqrt(2.0) - 1.0)) > 1e-9) return 3;

    ApcTrace *trace = NULL;
    if (apc_solve(sys, &p, 0, -1.0, false, &trace) != APC_STATUS_OK) return 4;
    ApcTraceSummary s;
    apc_trace_summary(trace, &s);
    if (!s.converged) return 5;

    ApcSystem *bad = NULL;
    if (apc_system_new(2, 2, a, b, NULL, 3, &bad) != APC_STATUS_DATA_ERROR) return 6;
    if (apc_last_error() == NULL) return 7;

    printf("rounds=%zu final_error=%g\n", s.rounds, s.final_error);
    apc_trace_free(trace);
    apc_system_free(sys);
    return 0;
}
