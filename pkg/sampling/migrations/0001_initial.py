# Generated by Django 5.2.6 on 2026-10-17 09:12

from django.db import migrations, models


class Migration(migrations.Migration):

    initial = True

    dependencies = [
    ]

    operations = [
        migrations.CreateModel(
            name='ExperimentRun',
            fields=[
                ('id', models.BigAutoField(auto_created=True, primary_key=True, serialize=False, verbose_name='ID')),
                ('command', models.CharField(db_index=True, max_length=32)),
                ('config_path', models.CharField(blank=True, max_length=500)),
                ('config_hash', models.CharField(blank=True, db_index=True, max_length=16)),
                ('seed', models.IntegerField(blank=True, null=True)),
                ('status', models.CharField(choices=[('success', 'Succès'), ('config-error', 'Erreur de configuration'), ('numerical-error', 'Erreur numérique'), ('io-error', "Erreur d'entrée/sortie")], db_index=True, max_length=20)),
                ('exit_code', models.IntegerField(default=0)),
                ('artifacts', models.JSONField(blank=True, default=list)),
                ('message', models.TextField(blank=True)),
                ('duration_ms', models.IntegerField(default=0)),
                ('created_at', models.DateTimeField(auto_now_add=True)),
            ],
            options={
                'verbose_name': 'Exécution',
                'verbose_name_plural': 'Exécutions',
                'ordering': ['-created_at', '-id'],
                'indexes': [models.Index(fields=['command', 'status'], name='run_command_status_idx')],
            },
        ),
    ]
