"use strict";
/**
 * VS Code glue: spawns gw-lsp, mirrors documents into it, renders the
 * controller's ghost suggestion as grey after-cursor text, and binds
 * Tab/Escape. All suggestion logic lives in SuggestionController.
 */
var __createBinding = (this && this.__createBinding) || (Object.create ? (function(o, m, k, k2) {
    if (k2 === undefined) k2 = k;
    var desc = Object.getOwnPropertyDescriptor(m, k);
    if (!desc || ("get" in desc ? !m.__esModule : desc.writable || desc.configurable)) {
      desc = { enumerable: true, get: function() { return m[k]; } };
    }
    Object.defineProperty(o, k2, desc);
}) : (function(o, m, k, k2) {
    if (k2 === undefined) k2 = k;
    o[k2] = m[k];
}));
var __setModuleDefault = (this && this.__setModuleDefault) || (Object.create ? (function(o, v) {
    Object.defineProperty(o, "default", { enumerable: true, value: v });
}) : function(o, v) {
    o["default"] = v;
});
var __importStar = (this && this.__importStar) || (function () {
    var ownKeys = function(o) {
        ownKeys = Object.getOwnPropertyNames || function (o) {
            var ar = [];
            for (var k in o) if (Object.prototype.hasOwnProperty.call(o, k)) ar[ar.length] = k;
            return ar;
        };
        return ownKeys(o);
    };
    return function (mod) {
        if (mod && mod.__esModule) return mod;
        var result = {};
        if (mod != null) for (var k = ownKeys(mod), i = 0; i < k.length; i++) if (k[i] !== "default") __createBinding(result, mod, k[i]);
        __setModuleDefault(result, mod);
        return result;
    };
})();
Object.defineProperty(exports, "__esModule", { value: true });
exports.SuggestionController = void 0;
exports.activate = activate;
exports.deactivate = deactivate;
const vscode = __importStar(require("vscode"));
const controller_1 = require("./controller");
const lspClient_1 = require("./lspClient");
const nodeTransport_1 = require("./nodeTransport");
const protocol_1 = require("./protocol");
// re-exported so the controller module stays editor-free
var controller_2 = require("./controller");
Object.defineProperty(exports, "SuggestionController", { enumerable: true, get: function () { return controller_2.SuggestionController; } });
const GHOST_DECORATION = vscode.window.createTextEditorDecorationType({
    after: {
        color: new vscode.ThemeColor("editorGhostText.foreground"),
        fontStyle: "italic",
    },
});
let transport;
function toWirePosition(position) {
    return { line: position.line, character: position.character };
}
async function activate(context) {
    const config = vscode.workspace.getConfiguration("ghostwriter");
    let enabled = config.get("enable", true);
    transport = (0, nodeTransport_1.spawnServerTransport)(config.get("lspPath", "gw-lsp"), config.get("lspArgs", []));
    const client = new lspClient_1.GwLspClient(new protocol_1.JsonRpcConnection(transport));
    await client.initialize();
    const host = {
        showGhost(suggestion) {
            const editor = vscode.window.activeTextEditor;
            if (!editor) {
                return;
            }
            const anchor = new vscode.Position(suggestion.anchor.line, suggestion.anchor.character);
            editor.setDecorations(GHOST_DECORATION, [
                {
                    range: new vscode.Range(anchor, anchor),
                    renderOptions: {
                        after: { contentText: suggestion.insertText.replace(/\n$/, "") },
                    },
                },
            ]);
            vscode.commands.executeCommand("setContext", "ghostwriter.ghostVisible", true);
        },
        clearGhost() {
            vscode.window.activeTextEditor?.setDecorations(GHOST_DECORATION, []);
            vscode.commands.executeCommand("setContext", "ghostwriter.ghostVisible", false);
        },
        async insertText(anchor, text) {
            const editor = vscode.window.activeTextEditor;
            if (editor) {
                // the edit event reaches the server before this resolves
                await editor.edit((builder) => builder.insert(new vscode.Position(anchor.line, anchor.character), text));
            }
            return (0, controller_1.positionAfterInsert)(anchor, text);
        },
        isNativePopupVisible() {
            // the Tab keybinding is already gated on !suggestWidgetVisible
            return false;
        },
        now() {
            return Date.now();
        },
    };
    const controller = new controller_1.SuggestionController(client, host);
    for (const document of vscode.workspace.textDocuments) {
        client.didOpen(document.uri.toString(), document.languageId, document.version, document.getText());
    }
    context.subscriptions.push(vscode.workspace.onDidOpenTextDocument((document) => {
        client.didOpen(document.uri.toString(), document.languageId, document.version, document.getText());
    }), vscode.workspace.onDidChangeTextDocument((event) => {
        client.didChange(event.document.uri.toString(), event.document.version, event.contentChanges.map((change) => ({
            range: {
                start: toWirePosition(change.range.start),
                end: toWirePosition(change.range.end),
            },
            text: change.text,
        })));
        controller.onTextChanged();
        const editor = vscode.window.activeTextEditor;
        if (enabled && editor && editor.document === event.document) {
            void controller.requestCompletion(event.document.uri.toString(), toWirePosition(editor.selection.active));
        }
    }), vscode.window.onDidChangeTextEditorSelection((event) => {
        controller.onCursorMoved(toWirePosition(event.selections[0].active));
    }), vscode.commands.registerCommand("ghostwriter.accept", async () => {
        const editor = vscode.window.activeTextEditor;
        if (!editor) {
            return;
        }
        const handled = await controller.accept(editor.document.uri.toString());
        if (!handled) {
            await vscode.commands.executeCommand("tab");
        }
    }), vscode.commands.registerCommand("ghostwriter.dismiss", () => controller.dismiss()), vscode.commands.registerCommand("ghostwriter.toggle", () => {
        enabled = !enabled;
        if (!enabled) {
            controller.dismiss();
        }
        vscode.window.showInformationMessage(`Ghostwriter suggestions ${enabled ? "enabled" : "disabled"}`);
    }));
}
function deactivate() {
    transport?.dispose();
}
//# sourceMappingURL=extension.js.map