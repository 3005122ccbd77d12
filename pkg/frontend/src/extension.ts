/**
 * VS Code glue: spawns gw-lsp, mirrors documents into it, renders the
 * controller's ghost suggestion as grey after-cursor text, and binds
 * Tab/Escape. All suggestion logic lives in SuggestionController.
 */

import * as vscode from "vscode";
import {
    GhostSuggestion,
    Position,
    SuggestionController,
    positionAfterInsert,
} from "./controller";
import { GwLspClient } from "./lspClient";
import { spawnServerTransport, ProcessTransport } from "./nodeTransport";
import { JsonRpcConnection } from "./protocol";

// re-exported so the controller module stays editor-free
export { SuggestionController } from "./controller";

const GHOST_DECORATION = vscode.window.createTextEditorDecorationType({
    after: {
        color: new vscode.ThemeColor("editorGhostText.foreground"),
        fontStyle: "italic",
    },
});

let transport: ProcessTransport | undefined;

function toWirePosition(position: vscode.Position): Position {
    return { line: position.line, character: position.character };
}

export async function activate(context: vscode.ExtensionContext): Promise<void> {
    const config = vscode.workspace.getConfiguration("ghostwriter");
    let enabled = config.get<boolean>("enable", true);

    transport = spawnServerTransport(
        config.get<string>("lspPath", "gw-lsp"),
        config.get<string[]>("lspArgs", []),
    );
    const client = new GwLspClient(new JsonRpcConnection(transport));
    await client.initialize();

    const host = {
        showGhost(suggestion: GhostSuggestion): void {
            const editor = vscode.window.activeTextEditor;
            if (!editor) {
                return;
            }
            const anchor = new vscode.Position(
                suggestion.anchor.line,
                suggestion.anchor.character,
            );
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
        clearGhost(): void {
            vscode.window.activeTextEditor?.setDecorations(GHOST_DECORATION, []);
            vscode.commands.executeCommand("setContext", "ghostwriter.ghostVisible", false);
        },
        async insertText(anchor: Position, text: string): Promise<Position> {
            const editor = vscode.window.activeTextEditor;
            if (editor) {
                // the edit event reaches the server before this resolves
                await editor.edit((builder) =>
                    builder.insert(new vscode.Position(anchor.line, anchor.character), text),
                );
            }
            return positionAfterInsert(anchor, text);
        },
        isNativePopupVisible(): boolean {
            // the Tab keybinding is already gated on !suggestWidgetVisible
            return false;
        },
        now(): number {
            return Date.now();
        },
    };
    const controller = new SuggestionController(client, host);

    for (const document of vscode.workspace.textDocuments) {
        client.didOpen(document.uri.toString(), document.languageId, document.version, document.getText());
    }

    context.subscriptions.push(
        vscode.workspace.onDidOpenTextDocument((document) => {
            client.didOpen(document.uri.toString(), document.languageId, document.version, document.getText());
        }),
        vscode.workspace.onDidChangeTextDocument((event) => {
            client.didChange(
                event.document.uri.toString(),
                event.document.version,
                event.contentChanges.map((change) => ({
                    range: {
                        start: toWirePosition(change.range.start),
                        end: toWirePosition(change.range.end),
                    },
                    text: change.text,
                })),
            );
            controller.onTextChanged();
            const editor = vscode.window.activeTextEditor;
            if (enabled && editor && editor.document === event.document) {
                void controller.requestCompletion(
                    event.document.uri.toString(),
                    toWirePosition(editor.selection.active),
                );
            }
        }),
        vscode.window.onDidChangeTextEditorSelection((event) => {
            controller.onCursorMoved(toWirePosition(event.selections[0].active));
        }),
        vscode.commands.registerCommand("ghostwriter.accept", async () => {
            const editor = vscode.window.activeTextEditor;
            if (!editor) {
                return;
            }
            const handled = await controller.accept(editor.document.uri.toString());
            if (!handled) {
                await vscode.commands.executeCommand("tab");
            }
        }),
        vscode.commands.registerCommand("ghostwriter.dismiss", () => controller.dismiss()),
        vscode.commands.registerCommand("ghostwriter.toggle", () => {
            enabled = !enabled;
            if (!enabled) {
                controller.dismiss();
            }
            vscode.window.showInformationMessage(
                `Ghostwriter suggestions ${enabled ? "enabled" : "disabled"}`,
            );
        }),
    );
}

export function deactivate(): void {
    transport?.dispose();
}
