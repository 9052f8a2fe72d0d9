from .extrapolate import Extrapolation, ExtrapolationInputs, extrapolate_time
from .reports import (
    SuiteReport,
    composite_additivity,
    export_report,
    format_percent,
    read_verdicts,
    render_table,
    run_suite,
    split_composite,
)
from .seeds import SeedCase, check_seeds, load_seeds, validate_seeds
from .suites import (
    COMPOSITE,
    IMAGE,
    OBJECT,
    Suite,
    TestCase,
    Verdict,
    build_suite,
    generate_composite_suite,
    generate_image_suite,
    generate_object_suite,
    read_manifest,
    write_manifest,
)
