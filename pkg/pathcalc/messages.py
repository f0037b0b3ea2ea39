"""Message templates for command-line diagnostics and verification summaries."""

MESSAGES = {
    # Diagnostics
    "error": "error: {detail}",
    "unexpected_error": "internal error: {detail} (see the log for the traceback)",
    "missing_input": "{command} needs an input path (-i/--input)",
    "missing_lambda": "give either --lambda or --depth (with --base and --T)",
    "bad_seed_range": "seed range '{text}' must look like a:b with a < b",
    "bad_int_list": "'{text}' is not a comma-separated list of integers",
    "written": "Wrote {rows} rows to {target}",

    # Verification suite
    "check_passed": "PASS {name}: {detail}",
    "check_failed": "FAIL {name}: {detail}",
    "check_crashed": "ERROR {name}: {detail}",
    "verify_summary": "{passed}/{total} checks passed ({mode} mode, {elapsed:.1f}s)",

    # Check details
    "detail_kono": "max bracket error {error:.2e}, index error {index_error:.2e}",
    "detail_identities": "{paths} paths, worst relative error {error:.2e}",
    "detail_pvar": "{cases} cases, {mismatches} mismatches",
    "detail_fraction": "{hits}/{total} seeds within tolerance (need {need})",
    "detail_chain_rule": "{hits}/{total} seeds within tolerance (need {need}); "
                         "median residual {fine:.3e} at depth {fine_depth} vs {coarse:.3e} "
                         "at depth {coarse_depth}",
    "detail_doleans": "linear equation {eq_hits}/{total}, duality {dual_hits}/{total} "
                      "(need {need}); jump cases error {jump_error:.2e}",
    "detail_index": "mean |H_hat - H|: {errors}",
    "detail_binomial": "{hits}/{total} seeds within 0.1 on the passage clock (need {need}); "
                       "median gaps at m={m_fine} vs m={m_coarse}: passage clock "
                       "{coupled_fine:.3f} vs {coupled_coarse:.3f}, calendar "
                       "{calendar_fine:.3f} vs {calendar_coarse:.3f}",
    "detail_hedge": "Brownian {hits}/{total} (need {need}); Kono tail gaps {gaps}, "
                    "delta errors {deltas}",
    "detail_nonex": "slope {slope:.3f}, min excess over bound {excess:.3f}, "
                    "max variance {variance:.2f}",
    "detail_pde": "max PDE residual {pde:.2e}, max derivative gap {fd:.2e}",
}


def get_text(key: str, **kwargs) -> str:
    """
    Look up a message template and fill it in.

    Args:
        key: Template key
        **kwargs: Format arguments for the template

    Returns:
        The formatted message, or the bare template when an argument is missing
    """
    text = MESSAGES.get(key, f"[Missing: {key}]")

    if kwargs:
        try:
            return text.format(**kwargs)
        except KeyError:
            return text

    return text
