from .metrics import (
    DATASET_DISPLAY_NAMES,
    EvalReport,
    evaluate,
    evaluate_predictions,
    improvement_summary,
    per_class_recall,
    predict_labels,
)
from .reporting import (
    FACE_MODE_DISPLAY_NAMES,
    ReferenceRow,
    ResultRow,
    ResultsTable,
    build_reference_rows,
    read_report_csv,
    render_results_table,
    write_confusion_csv,
    write_report_csv,
)
