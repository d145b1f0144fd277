// View-model for the live agreement panel: ICC rendered to two decimals (or a
// placeholder while overlap is insufficient) and the top disagreements sorted
// by absolute total difference, descending.
export const INSUFFICIENT_OVERLAP = 'insufficient overlap';
export function agreementPanel(snapshot, topN = 5) {
    const sorted = [...snapshot.disagreements].sort((a, b) => {
        if (b.delta_total !== a.delta_total)
            return b.delta_total - a.delta_total;
        return a.painting_id < b.painting_id ? -1 : 1;
    });
    return {
        iccText: snapshot.icc === null ? INSUFFICIENT_OVERLAP : snapshot.icc.toFixed(2),
        commonText: `${snapshot.n_common} painting(s) rated by both raters`,
        topDisagreements: sorted.slice(0, topN).map((d) => ({
            paintingId: d.painting_id,
            deltaTotal: d.delta_total,
        })),
    };
}
