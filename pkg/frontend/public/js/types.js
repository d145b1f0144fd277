// Wire types mirroring the workbench service JSON exactly.
export const COMPONENT_NAMES = [
    'originality',
    'color',
    'texture',
    'composition',
    'content',
];
