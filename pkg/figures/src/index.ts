export { SchemaError, SummaryRow, parseSummary, availableColumns } from "./summary";
export { SeriesPoint, aggregate, mean, std } from "./stats";
export { FigureSpec, PanelSpec, FAMILIES, PALETTE, render } from "./panels";
export { niceTicks, fmt, fmtTick, esc } from "./svg";
export { main } from "./cli";
