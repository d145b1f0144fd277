import assert from 'node:assert/strict';
import { test } from 'node:test';
import { INSUFFICIENT_OVERLAP, agreementPanel } from '../src/agreementPanel.js';
function snapshot(overrides = {}) {
    return {
        n_common: 0,
        icc: null,
        rater_ids: [],
        disagreements: [],
        ...overrides,
    };
}
test('missing icc renders the placeholder', () => {
    const view = agreementPanel(snapshot());
    assert.equal(view.iccText, INSUFFICIENT_OVERLAP);
});
test('icc rendered to two decimals', () => {
    assert.equal(agreementPanel(snapshot({ icc: 0.99, n_common: 10 })).iccText, '0.99');
    assert.equal(agreementPanel(snapshot({ icc: 0.987654, n_common: 8 })).iccText, '0.99');
    assert.equal(agreementPanel(snapshot({ icc: -0.3333, n_common: 5 })).iccText, '-0.33');
    assert.equal(agreementPanel(snapshot({ icc: 1, n_common: 4 })).iccText, '1.00');
});
test('disagreements sorted descending by delta', () => {
    const view = agreementPanel(snapshot({
        n_common: 3,
        icc: 0.5,
        disagreements: [
            { painting_id: 'p-small', delta_total: 4 },
            { painting_id: 'p-big', delta_total: 41 },
            { painting_id: 'p-mid', delta_total: 17 },
        ],
    }));
    assert.deepEqual(view.topDisagreements.map((d) => d.paintingId), ['p-big', 'p-mid', 'p-small']);
});
test('top-N truncation keeps the largest deltas', () => {
    const many = Array.from({ length: 12 }, (_, i) => ({
        painting_id: `p${i}`,
        delta_total: i,
    }));
    const view = agreementPanel(snapshot({ n_common: 12, icc: 0.7, disagreements: many }), 3);
    assert.deepEqual(view.topDisagreements.map((d) => d.deltaTotal), [11, 10, 9]);
});
test('common count line', () => {
    const view = agreementPanel(snapshot({ n_common: 7, icc: 0.8 }));
    assert.match(view.commonText, /7 painting/);
});
